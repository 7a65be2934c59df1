#include "l4r/geonames_client.hpp"

#include <charconv>
#include <map>
#include <set>
#include <tuple>
#include <thread>

#include <httplib.h>

#include "l4r/text.hpp"
#include "l4r/url.hpp"

namespace l4r::gazetteer {

namespace {

// GeoNames reports quota exhaustion in the body with HTTP 200.
constexpr int kStatusNoRecord = 11;
constexpr int kStatusDailyLimit = 18;
constexpr int kStatusHourlyLimit = 19;
constexpr int kStatusWeeklyLimit = 20;

double number_field(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  const auto s = v.get<std::string>();
  double out = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw Error(std::string("geonames: bad number in '") + key + "'");
  }
  return out;
}

std::string string_field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  return it->is_string() ? it->get<std::string>() : it->dump();
}

std::optional<std::int64_t> id_field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  std::int64_t id = 0;
  if (it->is_number_integer()) {
    id = it->get<std::int64_t>();
  } else if (it->is_string()) {
    const auto s = it->get<std::string>();
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  } else {
    return std::nullopt;
  }
  if (id <= 0) return std::nullopt;
  return id;
}

std::string format_param(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

ServiceError::ServiceError(int status, const std::string& message)
    : Error("geonames service error " + std::to_string(status) + ": " + message), status_(status) {}

RateLimiter::RateLimiter(double requests_per_second) {
  if (!(requests_per_second > 0.0)) throw Error("rate limit must be positive");
  interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / requests_per_second));
}

void RateLimiter::acquire() {
  std::lock_guard lock(mu_);
  if (last_) {
    const auto next = *last_ + interval_;
    if (std::chrono::steady_clock::now() < next) std::this_thread::sleep_until(next);
  }
  last_ = std::chrono::steady_clock::now();
}

ClientConfig client_config_from_json(const nlohmann::json& j) {
  ClientConfig cfg;
  cfg.base_url = j.value("base_url", cfg.base_url);
  cfg.account = j.value("account", cfg.account);
  cfg.requests_per_second = j.value("requests_per_second", cfg.requests_per_second);
  cfg.max_attempts = j.value("max_attempts", cfg.max_attempts);
  cfg.timeout = std::chrono::milliseconds(
      static_cast<long long>(j.value("timeout_s", cfg.timeout.count() / 1000.0) * 1000.0));
  if (cfg.max_attempts < 1) throw Error("online: max_attempts must be at least 1");
  return cfg;
}

GazetteerEntry entry_from_geonames_json(const nlohmann::json& j) {
  try {
    GazetteerEntry e;
    e.geoname_id = j.at("geonameId").get<std::int64_t>();
    e.name = string_field(j, "name");
    e.ascii_name = string_field(j, "asciiName");
    if (e.ascii_name.empty()) e.ascii_name = string_field(j, "toponymName");
    e.point = validate_point(number_field(j, "lat"), number_field(j, "lng"));
    const auto fcl = string_field(j, "fcl");
    e.feature_class = fcl.empty() ? 'P' : fcl.front();
    e.feature_code = string_field(j, "fcode");
    e.country_code = string_field(j, "countryCode");
    e.admin1_code = string_field(j, "adminCode1");
    if (const auto it = j.find("alternateNames"); it != j.end() && it->is_array()) {
      for (const auto& alt : *it) {
        e.alternate_names.emplace_back(string_field(alt, "lang"), string_field(alt, "name"));
      }
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("geonames: unexpected place payload: ") + ex.what());
  }
}

PostalCodeEntry postal_from_geonames_json(const nlohmann::json& j) {
  try {
    PostalCodeEntry e;
    e.country_code = string_field(j, "countryCode");
    e.postal_code = string_field(j, "postalCode");
    e.place_name = string_field(j, "placeName");
    e.point = validate_point(number_field(j, "lat"), number_field(j, "lng"));
    if (e.postal_code.empty()) throw Error("geonames: empty postal code");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("geonames: unexpected postal payload: ") + ex.what());
  }
}

GeoNamesClient::GeoNamesClient(ClientConfig cfg)
    : cfg_(std::move(cfg)), limiter_(cfg_.requests_per_second) {
  if (cfg_.account.empty()) throw Error("geonames client: account name is required");
  if (!parse_url(cfg_.base_url)) throw Error("geonames client: bad base url " + cfg_.base_url);
}

nlohmann::json GeoNamesClient::fetch(const std::string& endpoint,
                                     const std::vector<std::pair<std::string, std::string>>& params) {
  const auto base = *parse_url(cfg_.base_url);
  std::string prefix = base.target;
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  httplib::Params query;
  for (const auto& [k, v] : params) query.emplace(k, v);
  query.emplace("username", cfg_.account);
  const auto target = httplib::append_query_params(prefix + "/" + endpoint, query);

  httplib::Client http(base.origin());
  const auto secs = cfg_.timeout.count() / 1000;
  const auto usecs = (cfg_.timeout.count() % 1000) * 1000;
  http.set_connection_timeout(secs, usecs);
  http.set_read_timeout(secs, usecs);

  int last_status = 0;
  std::string last_error;
  for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
    limiter_.acquire();
    ++requests_sent_;
    auto res = http.Get(target);
    if (!res) {
      last_status = 0;
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_status = res->status;
      last_error = res->body;
      continue;
    }
    if (res->status == 429) throw RateLimited("geonames: HTTP 429");
    if (res->status != 200) throw ServiceError(res->status, res->body);

    nlohmann::json body;
    try {
      body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ServiceError(res->status, std::string("unparseable body: ") + e.what());
    }
    if (const auto st = body.find("status"); st != body.end() && st->is_object()) {
      const int value = st->value("value", 0);
      const auto message = st->value("message", std::string());
      if (value == kStatusDailyLimit || value == kStatusHourlyLimit || value == kStatusWeeklyLimit) {
        throw RateLimited("geonames: " + message);
      }
      throw ServiceError(value, message);
    }
    return body;
  }
  if (last_status == 0) throw NetworkError("geonames: " + last_error);
  throw ServiceError(last_status, last_error);
}

std::optional<GazetteerEntry> GeoNamesClient::find_nearby(const GeoPoint& p, double max_km) {
  auto body = fetch("findNearbyPlaceNameJSON", {{"lat", format_param(p.latitude())},
                                                {"lng", format_param(p.longitude())},
                                                {"radius", format_param(max_km)}});
  const auto it = body.find("geonames");
  if (it == body.end() || !it->is_array()) return std::nullopt;
  for (const auto& item : *it) {
    auto e = entry_from_geonames_json(item);
    if (e.feature_class == 'P' && haversine_km(p, e.point) <= max_km) return e;
  }
  return std::nullopt;
}

std::optional<PostalCodeEntry> GeoNamesClient::find_nearby_postal(const GeoPoint& p, double max_km) {
  auto body = fetch("findNearbyPostalCodesJSON", {{"lat", format_param(p.latitude())},
                                                  {"lng", format_param(p.longitude())},
                                                  {"radius", format_param(max_km)}});
  const auto it = body.find("postalCodes");
  if (it == body.end() || !it->is_array()) return std::nullopt;
  for (const auto& item : *it) {
    auto e = postal_from_geonames_json(item);
    if (haversine_km(p, e.point) <= max_km) return e;
  }
  return std::nullopt;
}

GazetteerEntry GeoNamesClient::get(std::int64_t geoname_id) { return get_record(geoname_id).entry; }

GeoNamesClient::PlaceRecord GeoNamesClient::get_record(std::int64_t geoname_id) {
  nlohmann::json body;
  try {
    body = fetch("getJSON", {{"geonameId", std::to_string(geoname_id)}});
  } catch (const ServiceError& e) {
    if (e.status() == kStatusNoRecord) throw UnknownId(geoname_id);
    throw;
  }
  PlaceRecord rec{entry_from_geonames_json(body), id_field(body, "adminId1"),
                  id_field(body, "countryId")};
  return rec;
}

GazetteerIndex build_online_index(GeoNamesClient& client, const std::vector<Event>& events,
                                  const OverrideTable& overrides, const EnrichConfig& cfg) {
  std::set<std::int64_t> wanted;
  std::map<std::tuple<std::string, std::string, std::string>, PostalCodeEntry> postal;
  for (const auto& [name, id] : overrides.entries()) wanted.insert(id);
  for (const auto& ev : events) {
    if (ev.city) {
      wanted.insert(ev.city->geoname_id);
    } else if (auto near = client.find_nearby(ev.point, cfg.reverse_max_km)) {
      wanted.insert(near->geoname_id);
    }
    if (!ev.postal_code) {
      if (auto pc = client.find_nearby_postal(ev.point, cfg.postal_max_km)) {
        postal.emplace(std::tuple(pc->country_code, pc->postal_code, pc->place_name), *pc);
      }
    }
  }

  std::map<std::int64_t, GazetteerEntry> fetched;
  std::vector<std::int64_t> queue(wanted.begin(), wanted.end());
  while (!queue.empty()) {
    const auto id = queue.back();
    queue.pop_back();
    if (fetched.contains(id)) continue;
    auto rec = client.get_record(id);
    for (const auto& parent : {rec.admin1_id, rec.country_id}) {
      if (parent && !fetched.contains(*parent)) queue.push_back(*parent);
    }
    fetched.emplace(id, std::move(rec.entry));
  }

  std::vector<GazetteerEntry> places;
  for (auto& [id, e] : fetched) {
    if (e.feature_class == 'P' || e.feature_class == 'A') places.push_back(std::move(e));
  }
  std::vector<PostalCodeEntry> codes;
  for (auto& [key, pc] : postal) codes.push_back(std::move(pc));
  return GazetteerIndex(std::move(places), std::move(codes));
}

}  // namespace l4r::gazetteer
