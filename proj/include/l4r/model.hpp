#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "l4r/error.hpp"

namespace l4r {

/// A WGS84 position in decimal degrees. Only constructible through
/// validate_point(), so every instance is in range.
class GeoPoint {
 public:
  double latitude() const noexcept { return lat_; }
  double longitude() const noexcept { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
  friend GeoPoint validate_point(double lat, double lon);

 private:
  GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {}
  double lat_;
  double lon_;
};

/// Throws OutOfRange naming the first offending axis (latitude first).
GeoPoint validate_point(double lat, double lon);

/// A calendar day without time of day.
struct CivilDate {
  int year = 1970;
  int month = 1;
  int day = 1;

  friend auto operator<=>(const CivilDate&, const CivilDate&) = default;

  /// YYYY-MM-DD
  std::string to_string() const;
  /// YYYY-MM
  std::string month_key() const;
};

bool is_valid_civil_date(int year, int month, int day) noexcept;

/// Accepts `YYYY-MM-DD` optionally followed by `T` or a space and any
/// time/zone suffix, which is discarded. Throws MalformedDate or InvalidDate.
CivilDate parse_civil_date(std::string_view s);

enum class Dataset { EOR, CH };

/// "eor" / "ch"
std::string_view to_string(Dataset d) noexcept;
/// Case-insensitive inverse of to_string; throws Error on anything else.
Dataset parse_dataset_name(std::string_view s);

/// A resolved GeoNames place. The IRI is always derived from the id.
struct GazetteerRef {
  std::int64_t geoname_id = 0;
  std::string preferred_name;

  std::string iri() const;
  friend bool operator==(const GazetteerRef&, const GazetteerRef&) = default;
};

std::string geonames_iri(std::int64_t geoname_id);
/// Extracts the numeric id from `http://sws.geonames.org/{id}/`.
std::optional<std::int64_t> geoname_id_from_iri(std::string_view iri);

struct Event {
  std::string id;
  Dataset dataset = Dataset::EOR;
  CivilDate date;
  std::optional<std::string> description;
  GeoPoint point = validate_point(0.0, 0.0);

  std::optional<GazetteerRef> country;
  std::optional<GazetteerRef> city;
  std::optional<GazetteerRef> province;
  std::optional<std::string> postal_code;

  // Cleaned source place strings, kept until enrichment resolves them.
  std::optional<std::string> country_text;
  std::optional<std::string> city_text;
  std::optional<std::string> province_text;

  std::vector<std::string> source_urls;
  std::vector<std::string> comments;
  std::map<std::string, std::string> city_labels;

  // How each enriched field was obtained, e.g. "city: reverse geocoded".
  std::vector<std::string> provenance;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Identifies an event across datasets; ids are only unique per dataset.
struct EventKey {
  Dataset dataset = Dataset::EOR;
  std::string id;

  friend auto operator<=>(const EventKey&, const EventKey&) = default;
};

inline EventKey key_of(const Event& ev) { return {ev.dataset, ev.id}; }

/// A minted event node grouping one or two source events.
struct AggregateEvent {
  std::string iri;
  std::vector<EventKey> members;
  EventKey primary;

  friend bool operator==(const AggregateEvent&, const AggregateEvent&) = default;
};

/// Source events plus the aggregates that reference them. Analytics read
/// only each aggregate's primary member.
struct IntegratedDataset {
  std::vector<Event> events;
  std::vector<AggregateEvent> aggregates;

  const Event* find(const EventKey& key) const;
  /// Primary member of every aggregate, in aggregate order. Throws Error if
  /// a primary is missing from `events`.
  std::vector<const Event*> primaries() const;
};

/// Content hash of (dataset, date, point, description), used as the event id
/// when the source record carries none. 16 lowercase hex digits.
std::string content_id(Dataset dataset, const CivilDate& date, const GeoPoint& point,
                       const std::optional<std::string>& description);

/// True for `scheme://host...` with an alphabetic scheme and no whitespace.
bool is_absolute_url(std::string_view url) noexcept;

/// ISO 639-1 style: exactly two lowercase ASCII letters.
bool is_language_code(std::string_view code) noexcept;

nlohmann::json to_json(const Event& ev);
/// Throws Error when a key has the wrong type or a value violates an invariant.
Event event_from_json(const nlohmann::json& j);

nlohmann::json events_to_json(const std::vector<Event>& events);
std::vector<Event> events_from_json(const nlohmann::json& j);

}  // namespace l4r
