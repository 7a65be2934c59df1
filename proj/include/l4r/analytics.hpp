#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "l4r/model.hpp"
#include "l4r/rdf.hpp"

namespace l4r::analytics {

// Every report reads only the primary member of each aggregate.

struct WktPoint {
  std::string aggregate;  // aggregate IRI
  CivilDate date;
  GeoPoint point = validate_point(0.0, 0.0);
  std::string wkt;        // POINT(lng lat)
};

std::string wkt_point(const GeoPoint& p);

/// start <= date <= end, optionally restricted to one resolved city.
/// Throws Error if start > end.
std::vector<WktPoint> uc1_event_points(const IntegratedDataset& ds,
                                       const std::optional<std::int64_t>& city_geoname_id,
                                       const CivilDate& start, const CivilDate& end);
/// One geo:asWKT wktLiteral triple per point, subject = aggregate IRI.
std::vector<rdf::Triple> uc1_triples(const std::vector<WktPoint>& points);
nlohmann::json uc1_geojson(const std::vector<WktPoint>& points);

struct MonthBucket {
  std::string month_year;  // YYYY-MM
  std::uint64_t count = 0;
  friend bool operator==(const MonthBucket&, const MonthBucket&) = default;
};

/// "2022-02" through "2023-04".
std::vector<std::string> default_months();
/// Inclusive range of YYYY-MM keys. Throws Error on malformed keys or first > last.
std::vector<std::string> month_range(std::string_view first, std::string_view last);
bool is_month_key(std::string_view s) noexcept;

/// Literal objects attached to the event node: date, description, comments,
/// city labels, region name, postal code.
std::vector<std::string> event_literals(const Event& ev);

/// Aggregates per month whose primary has any literal containing `keyword`
/// (case-insensitive). One bucket per requested month, zero-filled.
std::vector<MonthBucket> uc2_monthly_keyword_series(const IntegratedDataset& ds,
                                                    std::string_view keyword,
                                                    const std::vector<std::string>& months);
/// Aggregates per requested month regardless of content, zero-filled.
std::vector<MonthBucket> monthly_event_counts(const IntegratedDataset& ds,
                                              const std::vector<std::string>& months);
std::string month_buckets_csv(const std::vector<MonthBucket>& buckets);

struct CityLabelRow {
  std::vector<std::string> names;  // one per requested language, same order
  std::uint64_t count = 0;
  friend bool operator==(const CityLabelRow&, const CityLabelRow&) = default;
};

/// Events whose city carries a label in every requested language, grouped by
/// the label tuple, sorted by count desc then tuple, first top_n rows.
std::vector<CityLabelRow> uc3_multilingual_city_report(const IntegratedDataset& ds,
                                                       const std::vector<std::string>& langs,
                                                       std::size_t top_n);
std::string city_label_csv(const std::vector<std::string>& langs,
                           const std::vector<CityLabelRow>& rows);

struct RegionRank {
  std::string region;
  std::uint64_t occurrences = 0;
  friend bool operator==(const RegionRank&, const RegionRank&) = default;
};

/// Events per region with start <= date < end. Throws Error unless start < end.
std::vector<RegionRank> uc4_top_regions(const IntegratedDataset& ds, const CivilDate& start,
                                        const CivilDate& end, std::size_t n);

struct MonthlyRegions {
  std::string month_year;
  std::vector<RegionRank> top;
};

/// uc4_top_regions for each calendar month in [first, last].
std::vector<MonthlyRegions> uc4_monthly(const IntegratedDataset& ds, std::string_view first,
                                        std::string_view last, std::size_t n);
std::string region_rank_csv(const std::vector<RegionRank>& rows);
std::string monthly_regions_csv(const std::vector<MonthlyRegions>& rows);

struct RatioRow {
  std::string month_year;
  std::uint64_t attacks = 0;
  std::uint64_t deaths = 0;
  std::optional<double> ratio;
};

/// `month,deaths` with header. Throws FormatError(line).
std::map<std::string, std::uint64_t> parse_deaths_csv(std::string_view text);

/// Inner join on month. Months present on one side only are dropped and
/// reported through `warnings`.
std::vector<RatioRow> uc5_ratio_series(const std::vector<MonthBucket>& attacks,
                                       const std::map<std::string, std::uint64_t>& deaths,
                                       std::vector<std::string>* warnings = nullptr);
std::string ratio_csv(const std::vector<RatioRow>& rows);

struct ShelterRecord {
  std::optional<std::string> name;
  GeoPoint point = validate_point(0.0, 0.0);
};

/// `name,lat,lon` with header. Throws FormatError(line).
std::vector<ShelterRecord> parse_shelters_csv(std::string_view text);

struct UncoveredEvent {
  std::string aggregate;
  EventKey source;
  CivilDate date;
  GeoPoint point = validate_point(0.0, 0.0);
  std::optional<double> nearest_km;  // absent when there are no shelters
};

struct GridCell {
  std::int64_t lat_index = 0;  // floor(lat / cell_deg)
  std::int64_t lon_index = 0;
  std::uint64_t count = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct ShelterGap {
  std::vector<UncoveredEvent> uncovered;
  std::vector<GridCell> grid;  // sorted by (lat_index, lon_index)
  double cell_deg = 0.005;
};

/// Uncovered iff the nearest shelter is farther than radius_km. Optionally
/// restricted to events in one resolved city.
ShelterGap uc6_shelter_gap(const IntegratedDataset& ds, const std::vector<ShelterRecord>& shelters,
                           double radius_km = 1.0, double cell_deg = 0.005,
                           const std::optional<std::int64_t>& city_geoname_id = std::nullopt);
nlohmann::json uc6_geojson(const ShelterGap& gap);
/// `cell_lat,cell_lon,count`, coordinates of each cell's south-west corner.
std::string grid_csv(const ShelterGap& gap);

}  // namespace l4r::analytics
