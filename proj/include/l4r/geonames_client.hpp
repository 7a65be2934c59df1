#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "l4r/gazetteer.hpp"

namespace l4r::gazetteer {

class RateLimited : public Error {
 public:
  using Error::Error;
};

class NetworkError : public Error {
 public:
  using Error::Error;
};

class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string& message);
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// Spaces successive acquire() calls at least 1/rate seconds apart.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second);
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration interval_;
  std::optional<std::chrono::steady_clock::time_point> last_;
};

struct ClientConfig {
  std::string base_url = "http://api.geonames.org";
  std::string account;
  double requests_per_second = 1.0;
  int max_attempts = 3;
  std::chrono::milliseconds timeout{10000};
};

ClientConfig client_config_from_json(const nlohmann::json& j);

enum class OnlineRequest { FindNearby, PostalCode, Get };

/// Client for the GeoNames JSON web service. Requests are serialized through
/// the rate limiter; 5xx responses and transport failures are retried until
/// max_attempts is spent.
class GeoNamesClient {
 public:
  explicit GeoNamesClient(ClientConfig cfg);

  /// findNearbyPlaceNameJSON; nearest populated place within max_km.
  std::optional<GazetteerEntry> find_nearby(const GeoPoint& p, double max_km);
  /// findNearbyPostalCodesJSON; nearest postal centroid within max_km.
  std::optional<PostalCodeEntry> find_nearby_postal(const GeoPoint& p, double max_km);
  /// getJSON; full record including alternate names. Throws UnknownId on a
  /// service "does not exist" status.
  GazetteerEntry get(std::int64_t geoname_id);

  struct PlaceRecord {
    GazetteerEntry entry;
    std::optional<std::int64_t> admin1_id;   // "adminId1"
    std::optional<std::int64_t> country_id;  // "countryId"
  };
  /// getJSON with the parent ids the service reports.
  PlaceRecord get_record(std::int64_t geoname_id);

  std::size_t requests_sent() const noexcept { return requests_sent_; }

 private:
  nlohmann::json fetch(const std::string& endpoint,
                       const std::vector<std::pair<std::string, std::string>>& params);

  ClientConfig cfg_;
  RateLimiter limiter_;
  std::size_t requests_sent_ = 0;
};

/// Maps one element of a GeoNames "geonames" array, or a getJSON body.
GazetteerEntry entry_from_geonames_json(const nlohmann::json& j);
PostalCodeEntry postal_from_geonames_json(const nlohmann::json& j);

/// Fetches the entries enrichment of `events` needs (nearest place and its
/// admin1 and country parents, nearest postal code, override targets) into a
/// local index, so enrich_event can then run unchanged against it.
GazetteerIndex build_online_index(GeoNamesClient& client, const std::vector<Event>& events,
                                  const OverrideTable& overrides, const EnrichConfig& cfg);

}  // namespace l4r::gazetteer
