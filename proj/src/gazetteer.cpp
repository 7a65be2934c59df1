#include "l4r/gazetteer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "l4r/ingest.hpp"
#include "l4r/text.hpp"

namespace l4r::gazetteer {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// Calls fn(line_number, columns) for each non-blank, non-comment line.
template <typename Fn>
void for_each_tsv_line(std::string_view text, std::size_t expected_columns, Fn fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split_tabs(line);
    if (cols.size() != expected_columns) {
      throw FormatError("expected " + std::to_string(expected_columns) + " tab-separated columns, got " +
                            std::to_string(cols.size()),
                        line_no);
    }
    fn(line_no, cols);
  }
}

std::int64_t parse_id(std::string_view s, std::size_t line) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size() || v <= 0) {
    throw FormatError("bad geoname id '" + std::string(s) + "'", line);
  }
  return v;
}

GeoPoint parse_point(std::string_view lat_s, std::string_view lon_s, std::size_t line) {
  double lat = 0.0;
  double lon = 0.0;
  auto r1 = std::from_chars(lat_s.data(), lat_s.data() + lat_s.size(), lat);
  auto r2 = std::from_chars(lon_s.data(), lon_s.data() + lon_s.size(), lon);
  if (lat_s.empty() || lon_s.empty() || r1.ec != std::errc{} || r2.ec != std::errc{} ||
      r1.ptr != lat_s.data() + lat_s.size() || r2.ptr != lon_s.data() + lon_s.size()) {
    throw FormatError("bad coordinates", line);
  }
  try {
    return validate_point(lat, lon);
  } catch (const OutOfRange& e) {
    throw FormatError(e.what(), line);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// GeoNames pseudo-languages (link, post, iata, wkdt, ...) carry codes, not names.
bool is_name_language(std::string_view lang) {
  return lang.size() <= 3 || lang.find('-') != std::string_view::npos;
}

}  // namespace

double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double lat1 = a.latitude() * kDegToRad;
  const double lat2 = b.latitude() * kDegToRad;
  const double s_lat = std::sin((lat2 - lat1) / 2.0);
  const double s_lon = std::sin((b.longitude() - a.longitude()) * kDegToRad / 2.0);
  const double h = s_lat * s_lat + std::cos(lat1) * std::cos(lat2) * s_lon * s_lon;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

OverrideTable::OverrideTable(const std::map<std::string, std::int64_t>& entries) {
  for (const auto& [name, id] : entries) add(name, id);
}

void OverrideTable::add(std::string_view name, std::int64_t geoname_id) {
  if (geoname_id <= 0) throw Error("override '" + std::string(name) + "': id must be positive");
  auto key = ingest::clean_location_string(name);
  if (key.empty()) throw Error("override with empty name");
  entries_[std::move(key)] = geoname_id;
}

OverrideTable override_table_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("override table must be a JSON object");
  OverrideTable table;
  for (const auto& [name, id] : j.items()) {
    if (!id.is_number_integer()) throw Error("override '" + name + "' must map to an integer id");
    table.add(name, id.get<std::int64_t>());
  }
  return table;
}

std::optional<std::int64_t> resolve_override(const OverrideTable& table, std::string_view name) {
  const auto key = ingest::clean_location_string(name);
  const auto it = table.entries().find(key);
  if (it == table.entries().end()) return std::nullopt;
  return it->second;
}

GazetteerIndex::GazetteerIndex(std::vector<GazetteerEntry> places,
                               std::vector<PostalCodeEntry> postal)
    : places_(std::move(places)), postal_(std::move(postal)) {
  for (std::size_t i = 0; i < places_.size(); ++i) {
    const auto& e = places_[i];
    if (!by_id_.emplace(e.geoname_id, i).second) {
      throw Error("duplicate geoname id " + std::to_string(e.geoname_id));
    }
    if (e.feature_class == 'P') {
      std::set<std::string> names = {utf8_lower(e.name), utf8_lower(e.ascii_name)};
      for (const auto& [lang, alt] : e.alternate_names) {
        if (is_name_language(lang)) names.insert(utf8_lower(alt));
      }
      names.erase("");
      for (const auto& n : names) by_name_[n].push_back(i);
      place_grid_[cell_of(e.point)].push_back(i);
    } else if (e.feature_code == "ADM1") {
      admin1_.emplace(std::make_pair(e.country_code, e.admin1_code), i);
    } else if (e.feature_code.starts_with("PCL")) {
      countries_.emplace(e.country_code, i);
    }
  }
  for (std::size_t i = 0; i < postal_.size(); ++i) postal_grid_[cell_of(postal_[i].point)].push_back(i);
}

GazetteerIndex::CellKey GazetteerIndex::cell_of(const GeoPoint& p) noexcept {
  int lat = static_cast<int>(std::floor(p.latitude()));
  int lon = static_cast<int>(std::floor(p.longitude()));
  if (lat == 90) lat = 89;
  if (lon == 180) lon = -180;
  return {lat, lon};
}

const GazetteerEntry* GazetteerIndex::find(std::int64_t geoname_id) const {
  const auto it = by_id_.find(geoname_id);
  return it == by_id_.end() ? nullptr : &places_[it->second];
}

std::vector<const GazetteerEntry*> GazetteerIndex::places_named(std::string_view name) const {
  std::vector<const GazetteerEntry*> out;
  const auto it = by_name_.find(utf8_lower(name));
  if (it == by_name_.end()) return out;
  for (auto i : it->second) out.push_back(&places_[i]);
  return out;
}

const GazetteerEntry* GazetteerIndex::admin1(std::string_view country_code,
                                             std::string_view admin1_code) const {
  const auto it = admin1_.find({std::string(country_code), std::string(admin1_code)});
  return it == admin1_.end() ? nullptr : &places_[it->second];
}

const GazetteerEntry* GazetteerIndex::country(std::string_view country_code) const {
  const auto it = countries_.find(std::string(country_code));
  return it == countries_.end() ? nullptr : &places_[it->second];
}

template <typename Entry, typename Less>
const Entry* GazetteerIndex::nearest(const std::vector<Entry>& items, const Grid& grid,
                                     const GeoPoint& p, double max_km, Less less) const {
  const Entry* best = nullptr;
  double best_d = 0.0;
  auto consider = [&](std::size_t i) {
    const auto& e = items[i];
    const double d = haversine_km(p, e.point);
    if (d > max_km) return;
    if (!best || d < best_d || (d == best_d && less(e, *best))) {
      best = &e;
      best_d = d;
    }
  };

  // Angular radius of the search cap, padded against rounding.
  const double ang = max_km / kEarthRadiusKm;
  const double lat_span = ang / kDegToRad + 1e-6;
  const double lat_lo = p.latitude() - lat_span;
  const double lat_hi = p.latitude() + lat_span;
  bool all_lon = ang >= std::numbers::pi / 2.0 || lat_lo <= -90.0 || lat_hi >= 90.0;
  double lon_span = 180.0;
  if (!all_lon) {
    const double c = std::cos(p.latitude() * kDegToRad);
    const double s = std::sin(ang);
    if (s >= c) {
      all_lon = true;
    } else {
      lon_span = std::asin(s / c) / kDegToRad + 1e-6;
      all_lon = lon_span >= 180.0;
    }
  }
  const int cell_lat_lo = std::max(-90, static_cast<int>(std::floor(lat_lo)));
  const int cell_lat_hi = std::min(89, static_cast<int>(std::floor(lat_hi)));
  const long lon_cells = all_lon ? 360 : static_cast<long>(std::floor(p.longitude() + lon_span)) -
                                             static_cast<long>(std::floor(p.longitude() - lon_span)) + 1;
  const long cell_count = static_cast<long>(cell_lat_hi - cell_lat_lo + 1) * std::min(360L, lon_cells);

  if (cell_count > 20000) {
    for (const auto& [key, members] : grid) {
      for (auto i : members) consider(i);
    }
    return best;
  }
  const int lon_start = all_lon ? -180 : static_cast<int>(std::floor(p.longitude() - lon_span));
  const long n_lon = std::min(360L, lon_cells);
  for (int la = cell_lat_lo; la <= cell_lat_hi; ++la) {
    for (long k = 0; k < n_lon; ++k) {
      int lo = static_cast<int>(((lon_start + k + 180) % 360 + 360) % 360) - 180;
      const auto it = grid.find({la, lo});
      if (it == grid.end()) continue;
      for (auto i : it->second) consider(i);
    }
  }
  return best;
}

const GazetteerEntry* GazetteerIndex::nearest_place(const GeoPoint& p, double max_km) const {
  return nearest(places_, place_grid_, p, max_km,
                 [](const GazetteerEntry& a, const GazetteerEntry& b) {
                   return a.geoname_id < b.geoname_id;
                 });
}

const PostalCodeEntry* GazetteerIndex::nearest_postal(const GeoPoint& p, double max_km) const {
  return nearest(postal_, postal_grid_, p, max_km,
                 [](const PostalCodeEntry& a, const PostalCodeEntry& b) {
                   return std::tie(a.country_code, a.postal_code, a.place_name) <
                          std::tie(b.country_code, b.postal_code, b.place_name);
                 });
}

std::vector<GazetteerEntry> parse_places(std::string_view text) {
  std::vector<GazetteerEntry> out;
  std::set<std::int64_t> ids;
  for_each_tsv_line(text, 10, [&](std::size_t line, const std::vector<std::string_view>& c) {
    GazetteerEntry e;
    e.geoname_id = parse_id(c[0], line);
    if (c[6].size() != 1) throw FormatError("feature class must be one character", line);
    e.feature_class = c[6][0];
    e.point = parse_point(c[4], c[5], line);
    if (e.feature_class != 'P' && e.feature_class != 'A') return;
    if (!ids.insert(e.geoname_id).second) {
      throw FormatError("duplicate geoname id " + std::to_string(e.geoname_id), line);
    }
    e.name = std::string(c[1]);
    e.ascii_name = std::string(c[2]);
    std::size_t start = 0;
    const auto alts = c[3];
    while (start < alts.size()) {
      auto comma = alts.find(',', start);
      if (comma == std::string_view::npos) comma = alts.size();
      const auto alt = trim(alts.substr(start, comma - start));
      if (!alt.empty()) e.alternate_names.emplace_back("", std::string(alt));
      start = comma + 1;
    }
    e.feature_code = std::string(c[7]);
    e.country_code = std::string(c[8]);
    e.admin1_code = std::string(c[9]);
    out.push_back(std::move(e));
  });
  return out;
}

void parse_alternate_names(std::string_view text, std::vector<GazetteerEntry>& places) {
  std::unordered_map<std::int64_t, std::size_t> pos;
  for (std::size_t i = 0; i < places.size(); ++i) pos.emplace(places[i].geoname_id, i);
  for_each_tsv_line(text, 4, [&](std::size_t line, const std::vector<std::string_view>& c) {
    parse_id(c[0], line);
    const auto id = parse_id(c[1], line);
    const auto it = pos.find(id);
    if (it == pos.end() || trim(c[3]).empty()) return;
    places[it->second].alternate_names.emplace_back(std::string(c[2]), std::string(trim(c[3])));
  });
}

std::vector<PostalCodeEntry> parse_postal_codes(std::string_view text) {
  std::vector<PostalCodeEntry> out;
  for_each_tsv_line(text, 5, [&](std::size_t line, const std::vector<std::string_view>& c) {
    PostalCodeEntry e;
    e.country_code = std::string(c[0]);
    e.postal_code = std::string(trim(c[1]));
    if (e.postal_code.empty()) throw FormatError("empty postal code", line);
    e.place_name = std::string(c[2]);
    e.point = parse_point(c[3], c[4], line);
    out.push_back(std::move(e));
  });
  return out;
}

GazetteerIndex load_gazetteer(const std::filesystem::path& place_file,
                              const std::filesystem::path& alt_names_file,
                              const std::filesystem::path& postal_file) {
  auto wrap = [](const std::filesystem::path& path, auto&& fn) {
    try {
      return fn();
    } catch (const FormatError& e) {
      throw FormatError(path.filename().string() + ": " + e.what(), e.line());
    }
  };
  auto places = wrap(place_file, [&] { return parse_places(read_file(place_file)); });
  wrap(alt_names_file, [&] {
    parse_alternate_names(read_file(alt_names_file), places);
    return 0;
  });
  auto postal = wrap(postal_file, [&] { return parse_postal_codes(read_file(postal_file)); });
  return GazetteerIndex(std::move(places), std::move(postal));
}

std::optional<GazetteerRef> lookup_city_by_name(const GazetteerIndex& index, std::string_view name,
                                                const std::optional<GeoPoint>& hint) {
  const auto candidates = index.places_named(trim(name));
  if (candidates.empty()) return std::nullopt;
  if (candidates.size() == 1) return candidates.front()->ref();
  if (!hint) return std::nullopt;
  const GazetteerEntry* best = nullptr;
  double best_d = 0.0;
  for (const auto* e : candidates) {
    const double d = haversine_km(*hint, e->point);
    if (!best || d < best_d || (d == best_d && e->geoname_id < best->geoname_id)) {
      best = e;
      best_d = d;
    }
  }
  return best->ref();
}

std::optional<GazetteerRef> reverse_geocode(const GazetteerIndex& index, const GeoPoint& p,
                                            double max_km) {
  if (!(max_km > 0.0)) throw Error("reverse_geocode: max_km must be positive");
  const auto* e = index.nearest_place(p, max_km);
  if (!e) return std::nullopt;
  return e->ref();
}

std::optional<std::string> postal_code_for(const GazetteerIndex& index, const GeoPoint& p,
                                           double max_km) {
  if (!(max_km > 0.0)) throw Error("postal_code_for: max_km must be positive");
  const auto* e = index.nearest_postal(p, max_km);
  if (!e) return std::nullopt;
  return e->postal_code;
}

std::map<std::string, std::string> alternate_names_for(const GazetteerIndex& index,
                                                       std::int64_t geoname_id,
                                                       const std::set<std::string>& langs) {
  if (langs.empty()) throw Error("alternate_names_for: empty language set");
  const auto* e = index.find(geoname_id);
  if (!e) throw UnknownId(geoname_id);
  std::map<std::string, std::string> out;
  for (const auto& [lang, name] : e->alternate_names) {
    if (langs.contains(lang)) out.emplace(lang, name);
  }
  return out;
}

EnrichConfig enrich_config_from_json(const nlohmann::json& j) {
  EnrichConfig cfg;
  if (j.contains("languages")) {
    cfg.languages.clear();
    for (const auto& lang : j.at("languages")) {
      const auto code = lang.get<std::string>();
      if (!is_language_code(code)) throw Error("invalid language code '" + code + "'");
      cfg.languages.insert(code);
    }
    if (cfg.languages.empty()) throw Error("enrichment: languages must not be empty");
  }
  cfg.reverse_max_km = j.value("reverse_max_km", cfg.reverse_max_km);
  cfg.postal_max_km = j.value("postal_max_km", cfg.postal_max_km);
  cfg.name_max_km = j.value("name_max_km", cfg.name_max_km);
  if (!(cfg.reverse_max_km > 0 && cfg.postal_max_km > 0 && cfg.name_max_km > 0)) {
    throw Error("enrichment: distance limits must be positive");
  }
  return cfg;
}

nlohmann::json to_json(const EnrichConfig& cfg) {
  return {{"languages", cfg.languages},
          {"reverse_max_km", cfg.reverse_max_km},
          {"postal_max_km", cfg.postal_max_km},
          {"name_max_km", cfg.name_max_km}};
}

Event enrich_event(const GazetteerIndex& index, const OverrideTable& overrides, Event ev,
                   const EnrichConfig& cfg) {
  auto override_entry = [&](const std::optional<std::string>& text,
                            char feature_class) -> const GazetteerEntry* {
    if (!text) return nullptr;
    const auto id = resolve_override(overrides, *text);
    if (!id) return nullptr;
    const auto* e = index.find(*id);
    return (e && e->feature_class == feature_class) ? e : nullptr;
  };

  if (!ev.city) {
    if (const auto* e = override_entry(ev.city_text, 'P')) {
      ev.city = e->ref();
      ev.provenance.push_back("city: override table");
    } else if (ev.city_text) {
      const auto ref = lookup_city_by_name(index, *ev.city_text, ev.point);
      const auto* e = ref ? index.find(ref->geoname_id) : nullptr;
      if (e && haversine_km(ev.point, e->point) <= cfg.name_max_km) {
        ev.city = e->ref();
        ev.provenance.push_back("city: name match");
      }
    }
    if (!ev.city) {
      if (auto ref = reverse_geocode(index, ev.point, cfg.reverse_max_km)) {
        ev.city = std::move(ref);
        ev.provenance.push_back(ev.city_text ? "city: '" + *ev.city_text +
                                                   "' not matched, resolved from coordinates"
                                             : "city: resolved from coordinates");
      }
    }
  }

  const GazetteerEntry* city = ev.city ? index.find(ev.city->geoname_id) : nullptr;

  if (!ev.province) {
    if (const auto* e = override_entry(ev.province_text, 'A')) {
      ev.province = e->ref();
      ev.provenance.push_back("province: override table");
    } else if (city) {
      if (const auto* adm = index.admin1(city->country_code, city->admin1_code)) {
        ev.province = adm->ref();
        ev.provenance.push_back("province: admin1 of city");
      }
    }
  }

  if (!ev.country) {
    if (const auto* e = override_entry(ev.country_text, 'A')) {
      ev.country = e->ref();
      ev.provenance.push_back("country: override table");
    } else if (city) {
      if (const auto* c = index.country(city->country_code)) {
        ev.country = c->ref();
        ev.provenance.push_back("country: country of city");
      }
    }
  }

  if (!ev.postal_code) {
    if (auto code = postal_code_for(index, ev.point, cfg.postal_max_km)) {
      ev.postal_code = std::move(code);
      ev.provenance.push_back("postal_code: nearest postal centroid");
    }
  }

  if (city) {
    std::set<std::string> wanted;
    for (const auto& lang : cfg.languages) {
      if (!ev.city_labels.contains(lang)) wanted.insert(lang);
    }
    if (!wanted.empty()) {
      for (auto& [lang, name] : alternate_names_for(index, city->geoname_id, wanted)) {
        ev.city_labels.emplace(lang, std::move(name));
      }
    }
  }
  return ev;
}

EnrichStats enrich_all(const GazetteerIndex& index, const OverrideTable& overrides,
                       std::vector<Event>& events, const EnrichConfig& cfg) {
  EnrichStats stats;
  stats.events = events.size();
  for (auto& ev : events) {
    const bool had_city = ev.city.has_value();
    ev = enrich_event(index, overrides, std::move(ev), cfg);
    if (!ev.country) ++stats.missing_country;
    if (!ev.city) ++stats.missing_city;
    if (!ev.province) ++stats.missing_province;
    if (!ev.postal_code) ++stats.missing_postal_code;
    if (!had_city && ev.city &&
        std::any_of(ev.provenance.begin(), ev.provenance.end(), [](const std::string& p) {
          return p.starts_with("city:") && p.find("coordinates") != std::string::npos;
        })) {
      ++stats.city_from_coordinates;
    }
  }
  return stats;
}

}  // namespace l4r::gazetteer
