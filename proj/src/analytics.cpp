#include "l4r/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "l4r/csv_writer.hpp"
#include "l4r/gazetteer.hpp"
#include "l4r/ingest.hpp"
#include "l4r/text.hpp"

namespace l4r::analytics {

namespace {

struct Primary {
  const AggregateEvent* agg;
  const Event* ev;
};

std::vector<Primary> primaries(const IntegratedDataset& ds) {
  const auto evs = ds.primaries();
  std::vector<Primary> out;
  out.reserve(evs.size());
  for (std::size_t i = 0; i < evs.size(); ++i) out.push_back({&ds.aggregates[i], evs[i]});
  return out;
}

std::size_t line_of(std::string_view text, std::size_t offset) {
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + std::min(offset, text.size()), '\n'));
}

std::vector<std::vector<std::string>> read_table(std::string_view text,
                                                 const std::vector<std::string>& header,
                                                 std::vector<std::size_t>& lines) {
  std::vector<std::size_t> offsets;
  std::vector<std::vector<std::string>> rows;
  try {
    rows = ingest::parse_csv(text, &offsets);
  } catch (const SyntaxError& e) {
    throw FormatError(e.what(), line_of(text, e.position()));
  }
  if (rows.empty()) throw FormatError("missing header", 1);
  std::vector<std::string> got;
  for (const auto& h : rows.front()) got.push_back(ascii_lower(trim(h)));
  if (got != header) {
    std::string want;
    for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
    throw FormatError("expected header '" + want + "'", 1);
  }
  rows.erase(rows.begin());
  lines.clear();
  for (std::size_t i = 1; i < offsets.size(); ++i) lines.push_back(line_of(text, offsets[i]));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != header.size()) {
      throw FormatError("expected " + std::to_string(header.size()) + " columns", lines[i]);
    }
  }
  return rows;
}

double parse_double(std::string_view s, std::size_t line) {
  s = trim(s);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
    throw FormatError("not a number: '" + std::string(s) + "'", line);
  }
  return v;
}

CivilDate first_of(std::string_view month) {
  return parse_civil_date(std::string(month) + "-01");
}

CivilDate next_month(CivilDate d) {
  d.day = 1;
  if (++d.month > 12) {
    d.month = 1;
    ++d.year;
  }
  return d;
}

nlohmann::json point_geometry(const GeoPoint& p) {
  return {{"type", "Point"}, {"coordinates", {p.longitude(), p.latitude()}}};
}

}  // namespace

std::string wkt_point(const GeoPoint& p) {
  return "POINT(" + format_decimal(p.longitude()) + " " + format_decimal(p.latitude()) + ")";
}

std::vector<WktPoint> uc1_event_points(const IntegratedDataset& ds,
                                       const std::optional<std::int64_t>& city_geoname_id,
                                       const CivilDate& start, const CivilDate& end) {
  if (end < start) throw Error("uc1: start date after end date");
  std::vector<WktPoint> out;
  for (const auto& [agg, ev] : primaries(ds)) {
    if (ev->date < start || end < ev->date) continue;
    if (city_geoname_id && (!ev->city || ev->city->geoname_id != *city_geoname_id)) continue;
    out.push_back({agg->iri, ev->date, ev->point, wkt_point(ev->point)});
  }
  return out;
}

std::vector<rdf::Triple> uc1_triples(const std::vector<WktPoint>& points) {
  std::vector<rdf::Triple> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    out.emplace_back(rdf::Term::iri(p.aggregate), rdf::Term::iri(rdf::vocab::as_wkt()),
                     rdf::Term::typed_literal(p.wkt, rdf::vocab::wkt_literal()));
  }
  return out;
}

nlohmann::json uc1_geojson(const std::vector<WktPoint>& points) {
  auto features = nlohmann::json::array();
  for (const auto& p : points) {
    features.push_back({{"type", "Feature"},
                        {"geometry", point_geometry(p.point)},
                        {"properties", {{"event", p.aggregate}, {"date", p.date.to_string()}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

bool is_month_key(std::string_view s) noexcept {
  if (s.size() != 7 || s[4] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  return month >= 1 && month <= 12;
}

std::vector<std::string> month_range(std::string_view first, std::string_view last) {
  if (!is_month_key(first) || !is_month_key(last)) {
    throw Error("month keys must look like YYYY-MM");
  }
  if (last < first) throw Error("month range: first after last");
  std::vector<std::string> out;
  for (auto d = first_of(first); d.month_key() <= last; d = next_month(d)) {
    out.push_back(d.month_key());
  }
  return out;
}

std::vector<std::string> default_months() { return month_range("2022-02", "2023-04"); }

std::vector<std::string> event_literals(const Event& ev) {
  std::vector<std::string> out{ev.date.to_string()};
  if (ev.description) out.push_back(*ev.description);
  out.insert(out.end(), ev.comments.begin(), ev.comments.end());
  for (const auto& [lang, name] : ev.city_labels) out.push_back(name);
  if (ev.province && !ev.province->preferred_name.empty()) {
    out.push_back(ev.province->preferred_name);
  }
  if (ev.postal_code) out.push_back(*ev.postal_code);
  return out;
}

std::vector<MonthBucket> uc2_monthly_keyword_series(const IntegratedDataset& ds,
                                                    std::string_view keyword,
                                                    const std::vector<std::string>& months) {
  if (months.empty()) throw Error("uc2: month list is empty");
  if (keyword.empty()) throw Error("uc2: keyword is empty");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& m : months) {
    if (!is_month_key(m)) throw Error("uc2: malformed month '" + m + "'");
    counts.emplace(m, 0);
  }
  const auto needle = utf8_lower(keyword);
  for (const auto& [agg, ev] : primaries(ds)) {
    const auto it = counts.find(ev->date.month_key());
    if (it == counts.end()) continue;
    const auto lits = event_literals(*ev);
    const bool hit = std::any_of(lits.begin(), lits.end(), [&](const std::string& lit) {
      return utf8_lower(lit).find(needle) != std::string::npos;
    });
    if (hit) ++it->second;
  }
  std::vector<MonthBucket> out;
  out.reserve(months.size());
  for (const auto& m : months) out.push_back({m, counts.at(m)});
  return out;
}

std::vector<MonthBucket> monthly_event_counts(const IntegratedDataset& ds,
                                              const std::vector<std::string>& months) {
  if (months.empty()) throw Error("month list is empty");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& m : months) {
    if (!is_month_key(m)) throw Error("malformed month '" + m + "'");
    counts.emplace(m, 0);
  }
  for (const auto& [agg, ev] : primaries(ds)) {
    if (const auto it = counts.find(ev->date.month_key()); it != counts.end()) ++it->second;
  }
  std::vector<MonthBucket> out;
  for (const auto& m : months) out.push_back({m, counts.at(m)});
  return out;
}

std::string month_buckets_csv(const std::vector<MonthBucket>& buckets) {
  CsvWriter csv;
  csv.row({"month", "count"});
  for (const auto& b : buckets) csv.row({b.month_year, std::to_string(b.count)});
  return csv.str();
}

std::vector<CityLabelRow> uc3_multilingual_city_report(const IntegratedDataset& ds,
                                                       const std::vector<std::string>& langs,
                                                       std::size_t top_n) {
  if (langs.empty()) throw Error("uc3: language list is empty");
  for (const auto& l : langs) {
    if (!is_language_code(l)) throw Error("uc3: invalid language code '" + l + "'");
  }
  std::map<std::vector<std::string>, std::uint64_t> groups;
  for (const auto& [agg, ev] : primaries(ds)) {
    std::vector<std::string> names;
    for (const auto& l : langs) {
      const auto it = ev->city_labels.find(l);
      if (it == ev->city_labels.end()) break;
      names.push_back(it->second);
    }
    if (names.size() == langs.size()) ++groups[names];
  }
  std::vector<CityLabelRow> rows;
  for (auto& [names, count] : groups) rows.push_back({names, count});
  std::stable_sort(rows.begin(), rows.end(), [](const CityLabelRow& a, const CityLabelRow& b) {
    return a.count > b.count;
  });
  if (rows.size() > top_n) rows.resize(top_n);
  return rows;
}

std::string city_label_csv(const std::vector<std::string>& langs,
                           const std::vector<CityLabelRow>& rows) {
  CsvWriter csv;
  auto header = langs;
  header.push_back("count");
  csv.row(header);
  for (const auto& r : rows) {
    auto fields = r.names;
    fields.push_back(std::to_string(r.count));
    csv.row(fields);
  }
  return csv.str();
}

std::vector<RegionRank> uc4_top_regions(const IntegratedDataset& ds, const CivilDate& start,
                                        const CivilDate& end, std::size_t n) {
  if (!(start < end)) throw Error("uc4: start date must precede end date");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& [agg, ev] : primaries(ds)) {
    if (ev->date < start || !(ev->date < end)) continue;
    if (!ev->province || ev->province->preferred_name.empty()) continue;
    ++counts[ev->province->preferred_name];
  }
  std::vector<RegionRank> rows;
  for (const auto& [region, count] : counts) rows.push_back({region, count});
  std::stable_sort(rows.begin(), rows.end(), [](const RegionRank& a, const RegionRank& b) {
    return a.occurrences > b.occurrences;
  });
  if (rows.size() > n) rows.resize(n);
  return rows;
}

std::vector<MonthlyRegions> uc4_monthly(const IntegratedDataset& ds, std::string_view first,
                                        std::string_view last, std::size_t n) {
  std::vector<MonthlyRegions> out;
  for (const auto& m : month_range(first, last)) {
    const auto start = first_of(m);
    out.push_back({m, uc4_top_regions(ds, start, next_month(start), n)});
  }
  return out;
}

std::string region_rank_csv(const std::vector<RegionRank>& rows) {
  CsvWriter csv;
  csv.row({"region", "occurrences"});
  for (const auto& r : rows) csv.row({r.region, std::to_string(r.occurrences)});
  return csv.str();
}

std::string monthly_regions_csv(const std::vector<MonthlyRegions>& rows) {
  CsvWriter csv;
  csv.row({"month", "rank", "region", "occurrences"});
  for (const auto& m : rows) {
    for (std::size_t i = 0; i < m.top.size(); ++i) {
      csv.row({m.month_year, std::to_string(i + 1), m.top[i].region,
               std::to_string(m.top[i].occurrences)});
    }
  }
  return csv.str();
}

std::map<std::string, std::uint64_t> parse_deaths_csv(std::string_view text) {
  std::vector<std::size_t> lines;
  const auto rows = read_table(text, {"month", "deaths"}, lines);
  std::map<std::string, std::uint64_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto month = std::string(trim(rows[i][0]));
    if (!is_month_key(month)) throw FormatError("malformed month '" + month + "'", lines[i]);
    const auto raw = trim(rows[i][1]);
    std::uint64_t deaths = 0;
    auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), deaths);
    if (raw.empty() || ec != std::errc{} || p != raw.data() + raw.size()) {
      throw FormatError("deaths must be a non-negative integer", lines[i]);
    }
    if (!out.emplace(month, deaths).second) {
      throw FormatError("duplicate month '" + month + "'", lines[i]);
    }
  }
  return out;
}

std::vector<RatioRow> uc5_ratio_series(const std::vector<MonthBucket>& attacks,
                                       const std::map<std::string, std::uint64_t>& deaths,
                                       std::vector<std::string>* warnings) {
  std::vector<RatioRow> out;
  std::set<std::string> seen;
  for (const auto& b : attacks) {
    seen.insert(b.month_year);
    const auto it = deaths.find(b.month_year);
    if (it == deaths.end()) {
      if (warnings) warnings->push_back(b.month_year + ": no deaths figure, row dropped");
      continue;
    }
    RatioRow row{b.month_year, b.count, it->second, std::nullopt};
    if (b.count > 0) row.ratio = static_cast<double>(it->second) / static_cast<double>(b.count);
    out.push_back(row);
  }
  if (warnings) {
    for (const auto& [month, n] : deaths) {
      if (!seen.contains(month)) warnings->push_back(month + ": not in attack series, row dropped");
    }
  }
  return out;
}

std::string ratio_csv(const std::vector<RatioRow>& rows) {
  CsvWriter csv;
  csv.comment("proof of concept only; not suitable for real-world policy decisions");
  csv.row({"month", "attacks", "deaths", "ratio"});
  for (const auto& r : rows) {
    csv.row({r.month_year, std::to_string(r.attacks), std::to_string(r.deaths),
             r.ratio ? format_decimal(*r.ratio) : std::string()});
  }
  return csv.str();
}

std::vector<ShelterRecord> parse_shelters_csv(std::string_view text) {
  std::vector<std::size_t> lines;
  const auto rows = read_table(text, {"name", "lat", "lon"}, lines);
  std::vector<ShelterRecord> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ShelterRecord rec;
    const auto name = trim(rows[i][0]);
    if (!name.empty()) rec.name = std::string(name);
    try {
      rec.point = validate_point(parse_double(rows[i][1], lines[i]), parse_double(rows[i][2], lines[i]));
    } catch (const OutOfRange& e) {
      throw FormatError(e.what(), lines[i]);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

ShelterGap uc6_shelter_gap(const IntegratedDataset& ds, const std::vector<ShelterRecord>& shelters,
                           double radius_km, double cell_deg,
                           const std::optional<std::int64_t>& city_geoname_id) {
  if (!(radius_km > 0.0)) throw Error("uc6: radius must be positive");
  if (!(cell_deg > 0.0)) throw Error("uc6: grid cell size must be positive");
  ShelterGap gap;
  gap.cell_deg = cell_deg;
  std::map<std::pair<std::int64_t, std::int64_t>, std::uint64_t> cells;
  for (const auto& [agg, ev] : primaries(ds)) {
    if (city_geoname_id && (!ev->city || ev->city->geoname_id != *city_geoname_id)) continue;
    std::optional<double> nearest;
    for (const auto& s : shelters) {
      const double d = gazetteer::haversine_km(ev->point, s.point);
      if (!nearest || d < *nearest) nearest = d;
    }
    if (nearest && *nearest <= radius_km) continue;
    gap.uncovered.push_back({agg->iri, key_of(*ev), ev->date, ev->point, nearest});
    const auto lat_i = static_cast<std::int64_t>(std::floor(ev->point.latitude() / cell_deg));
    const auto lon_i = static_cast<std::int64_t>(std::floor(ev->point.longitude() / cell_deg));
    ++cells[{lat_i, lon_i}];
  }
  for (const auto& [cell, count] : cells) gap.grid.push_back({cell.first, cell.second, count});
  return gap;
}

nlohmann::json uc6_geojson(const ShelterGap& gap) {
  auto features = nlohmann::json::array();
  for (const auto& u : gap.uncovered) {
    nlohmann::json props = {{"event", u.aggregate}, {"date", u.date.to_string()}};
    props["nearest_shelter_km"] = u.nearest_km ? nlohmann::json(*u.nearest_km) : nlohmann::json();
    features.push_back(
        {{"type", "Feature"}, {"geometry", point_geometry(u.point)}, {"properties", props}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

std::string grid_csv(const ShelterGap& gap) {
  CsvWriter csv;
  csv.row({"cell_lat", "cell_lon", "count"});
  for (const auto& c : gap.grid) {
    csv.row({format_decimal(static_cast<double>(c.lat_index) * gap.cell_deg),
             format_decimal(static_cast<double>(c.lon_index) * gap.cell_deg),
             std::to_string(c.count)});
  }
  return csv.str();
}

}  // namespace l4r::analytics
