#include "l4r/model.hpp"

#include <charconv>
#include <cmath>

#include "l4r/text.hpp"

namespace l4r {

namespace {

std::string axis_name(OutOfRange::Axis axis) {
  return axis == OutOfRange::Axis::Latitude ? "latitude" : "longitude";
}

bool parse_fixed_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

template <typename T>
std::optional<T> opt(const nlohmann::json& j, const char* key) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) return it->get<T>();
  return std::nullopt;
}

std::optional<GazetteerRef> ref_from_json(const nlohmann::json& j, const char* id_key,
                                          const char* name_key) {
  auto id = opt<std::int64_t>(j, id_key);
  if (!id) return std::nullopt;
  if (*id <= 0) throw Error(std::string(id_key) + " must be positive");
  return GazetteerRef{*id, opt<std::string>(j, name_key).value_or("")};
}

}  // namespace

OutOfRange::OutOfRange(Axis axis, double value)
    : Error(axis_name(axis) + " out of range: " + format_decimal(value, 7)), axis_(axis) {}

MalformedDate::MalformedDate(const std::string& text) : Error("malformed date: '" + text + "'") {}

InvalidDate::InvalidDate(const std::string& text) : Error("invalid calendar date: '" + text + "'") {}

SyntaxError::SyntaxError(const std::string& what, std::size_t position)
    : Error(what + " (at " + std::to_string(position) + ")"), position_(position) {}

MissingMandatoryField::MissingMandatoryField(const std::string& canonical_field,
                                             std::size_t record)
    : Error("record " + std::to_string(record) + ": missing mandatory field '" +
            canonical_field + "'"),
      field_(canonical_field),
      record_(record) {}

FormatError::FormatError(const std::string& what, std::size_t line)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

UnknownId::UnknownId(long long geoname_id)
    : Error("unknown geoname id " + std::to_string(geoname_id)) {}

RecordError::RecordError(std::size_t index, const std::string& cause)
    : Error("record " + std::to_string(index) + ": " + cause), index_(index) {}

GeoPoint validate_point(double lat, double lon) {
  if (!(lat >= -90.0 && lat <= 90.0)) throw OutOfRange(OutOfRange::Axis::Latitude, lat);
  if (!(lon >= -180.0 && lon <= 180.0)) throw OutOfRange(OutOfRange::Axis::Longitude, lon);
  return GeoPoint(lat, lon);
}

bool is_valid_civil_date(int year, int month, int day) noexcept {
  if (month < 1 || month > 12 || day < 1) return false;
  static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  const int limit = (month == 2 && leap) ? 29 : days[month - 1];
  return day <= limit;
}

std::string CivilDate::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::string CivilDate::month_key() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

CivilDate parse_civil_date(std::string_view raw) {
  const auto s = trim(raw);
  const std::string text(s);
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') throw MalformedDate(text);
  if (s.size() > 10 && s[10] != 'T' && s[10] != 't' && s[10] != ' ') throw MalformedDate(text);
  CivilDate d;
  if (!parse_fixed_int(s.substr(0, 4), d.year) || !parse_fixed_int(s.substr(5, 2), d.month) ||
      !parse_fixed_int(s.substr(8, 2), d.day)) {
    throw MalformedDate(text);
  }
  if (!is_valid_civil_date(d.year, d.month, d.day)) throw InvalidDate(text);
  return d;
}

std::string_view to_string(Dataset d) noexcept { return d == Dataset::EOR ? "eor" : "ch"; }

Dataset parse_dataset_name(std::string_view s) {
  const auto lower = ascii_lower(trim(s));
  if (lower == "eor") return Dataset::EOR;
  if (lower == "ch") return Dataset::CH;
  throw Error("unknown dataset '" + std::string(s) + "' (expected eor or ch)");
}

std::string geonames_iri(std::int64_t geoname_id) {
  return "http://sws.geonames.org/" + std::to_string(geoname_id) + "/";
}

std::string GazetteerRef::iri() const { return geonames_iri(geoname_id); }

std::optional<std::int64_t> geoname_id_from_iri(std::string_view iri) {
  constexpr std::string_view prefix = "http://sws.geonames.org/";
  if (!iri.starts_with(prefix) || !iri.ends_with("/")) return std::nullopt;
  const auto digits = iri.substr(prefix.size(), iri.size() - prefix.size() - 1);
  if (digits.empty()) return std::nullopt;
  std::int64_t id = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
  if (ec != std::errc{} || p != digits.data() + digits.size() || id <= 0) return std::nullopt;
  return id;
}

std::string content_id(Dataset dataset, const CivilDate& date, const GeoPoint& point,
                       const std::optional<std::string>& description) {
  std::string key;
  key += to_string(dataset);
  key += '\x1f';
  key += date.to_string();
  key += '\x1f';
  key += format_decimal(point.latitude());
  key += '\x1f';
  key += format_decimal(point.longitude());
  key += '\x1f';
  key += description.value_or("");
  return sha256_hex(key).substr(0, 16);
}

bool is_absolute_url(std::string_view url) noexcept {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) return false;
  for (std::size_t i = 0; i < sep; ++i) {
    const char c = url[i];
    const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    const bool other = (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.';
    if (!(alpha || (i > 0 && other))) return false;
  }
  const auto rest = url.substr(sep + 3);
  if (rest.empty() || rest.front() == '/') return false;
  for (unsigned char c : url) {
    if (c <= 0x20 || c == 0x7F || c == '<' || c == '>' || c == '"') return false;
  }
  return true;
}

bool is_language_code(std::string_view code) noexcept {
  return code.size() == 2 && code[0] >= 'a' && code[0] <= 'z' && code[1] >= 'a' &&
         code[1] <= 'z';
}

nlohmann::json to_json(const Event& ev) {
  nlohmann::json j;
  j["id"] = ev.id;
  j["dataset"] = std::string(to_string(ev.dataset));
  j["date"] = ev.date.to_string();
  if (ev.description) j["description"] = *ev.description;
  j["lat"] = ev.point.latitude();
  j["lon"] = ev.point.longitude();
  auto put_ref = [&](const std::optional<GazetteerRef>& ref, const char* id_key,
                     const char* name_key) {
    if (!ref) return;
    j[id_key] = ref->geoname_id;
    if (!ref->preferred_name.empty()) j[name_key] = ref->preferred_name;
  };
  put_ref(ev.country, "country_geoname_id", "country_name");
  put_ref(ev.city, "city_geoname_id", "city_name");
  put_ref(ev.province, "province_geoname_id", "province_name");
  if (ev.postal_code) j["postal_code"] = *ev.postal_code;
  if (ev.country_text) j["country_text"] = *ev.country_text;
  if (ev.city_text) j["city_text"] = *ev.city_text;
  if (ev.province_text) j["province_text"] = *ev.province_text;
  j["source_urls"] = ev.source_urls;
  j["comments"] = ev.comments;
  j["city_labels"] = nlohmann::json::object();
  for (const auto& [lang, name] : ev.city_labels) j["city_labels"][lang] = name;
  if (!ev.provenance.empty()) j["provenance"] = ev.provenance;
  return j;
}

Event event_from_json(const nlohmann::json& j) {
  try {
    Event ev;
    ev.id = j.at("id").get<std::string>();
    if (ev.id.empty()) throw Error("empty id");
    ev.dataset = parse_dataset_name(j.at("dataset").get<std::string>());
    ev.date = parse_civil_date(j.at("date").get<std::string>());
    ev.description = opt<std::string>(j, "description");
    ev.point = validate_point(j.at("lat").get<double>(), j.at("lon").get<double>());
    ev.country = ref_from_json(j, "country_geoname_id", "country_name");
    ev.city = ref_from_json(j, "city_geoname_id", "city_name");
    ev.province = ref_from_json(j, "province_geoname_id", "province_name");
    ev.postal_code = opt<std::string>(j, "postal_code");
    ev.country_text = opt<std::string>(j, "country_text");
    ev.city_text = opt<std::string>(j, "city_text");
    ev.province_text = opt<std::string>(j, "province_text");
    ev.source_urls = opt<std::vector<std::string>>(j, "source_urls").value_or(std::vector<std::string>{});
    for (const auto& url : ev.source_urls) {
      if (!is_absolute_url(url)) throw Error("invalid source url '" + url + "'");
    }
    ev.comments = opt<std::vector<std::string>>(j, "comments").value_or(std::vector<std::string>{});
    for (const auto& c : ev.comments) {
      if (c.empty()) throw Error("empty comment");
    }
    if (auto it = j.find("city_labels"); it != j.end() && !it->is_null()) {
      for (const auto& [lang, name] : it->items()) {
        if (!is_language_code(lang)) throw Error("invalid language code '" + lang + "'");
        ev.city_labels[lang] = name.get<std::string>();
      }
    }
    ev.provenance = opt<std::vector<std::string>>(j, "provenance").value_or(std::vector<std::string>{});
    return ev;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("event json: ") + e.what());
  }
}

const Event* IntegratedDataset::find(const EventKey& key) const {
  for (const auto& ev : events) {
    if (ev.dataset == key.dataset && ev.id == key.id) return &ev;
  }
  return nullptr;
}

std::vector<const Event*> IntegratedDataset::primaries() const {
  std::map<EventKey, const Event*> by_key;
  for (const auto& ev : events) by_key.emplace(key_of(ev), &ev);
  std::vector<const Event*> out;
  out.reserve(aggregates.size());
  for (const auto& agg : aggregates) {
    const auto it = by_key.find(agg.primary);
    if (it == by_key.end()) throw Error("aggregate " + agg.iri + ": primary source not loaded");
    out.push_back(it->second);
  }
  return out;
}

nlohmann::json events_to_json(const std::vector<Event>& events) {
  auto arr = nlohmann::json::array();
  for (const auto& ev : events) arr.push_back(to_json(ev));
  return arr;
}

std::vector<Event> events_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("event file must hold a JSON array");
  std::vector<Event> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      out.push_back(event_from_json(j[i]));
    } catch (const Error& e) {
      throw RecordError(i, e.what());
    }
  }
  return out;
}

}  // namespace l4r
