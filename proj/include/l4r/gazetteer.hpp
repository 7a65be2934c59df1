#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "l4r/model.hpp"

namespace l4r::gazetteer {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance on a sphere of radius kEarthRadiusKm. Symmetric in
/// its arguments bit for bit.
double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept;

struct GazetteerEntry {
  std::int64_t geoname_id = 0;
  std::string name;
  std::string ascii_name;
  std::vector<std::pair<std::string, std::string>> alternate_names;  // (language, name)
  GeoPoint point = validate_point(0.0, 0.0);
  char feature_class = 'P';  // 'P' populated place, 'A' administrative area
  std::string feature_code;  // PPL, PPLA, ADM1, PCLI, ...
  std::string country_code;
  std::string admin1_code;

  GazetteerRef ref() const { return {geoname_id, name}; }
};

struct PostalCodeEntry {
  std::string country_code;
  std::string postal_code;
  std::string place_name;
  GeoPoint point = validate_point(0.0, 0.0);
};

/// Variant spelling -> canonical geoname id. Keys are cleaned on insert.
class OverrideTable {
 public:
  OverrideTable() = default;
  explicit OverrideTable(const std::map<std::string, std::int64_t>& entries);

  void add(std::string_view name, std::int64_t geoname_id);
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<std::string, std::int64_t>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, std::int64_t> entries_;
};

OverrideTable override_table_from_json(const nlohmann::json& j);

/// Exact lookup after cleaning the query with clean_location_string.
std::optional<std::int64_t> resolve_override(const OverrideTable& table, std::string_view name);

/// Immutable offline gazetteer. Nearest-neighbor queries bucket entries into
/// one-degree cells; results are identical to a linear scan ordered by
/// (distance, id).
class GazetteerIndex {
 public:
  GazetteerIndex() = default;
  GazetteerIndex(std::vector<GazetteerEntry> places, std::vector<PostalCodeEntry> postal);

  std::size_t size() const noexcept { return places_.size(); }
  const std::vector<GazetteerEntry>& places() const noexcept { return places_; }
  const std::vector<PostalCodeEntry>& postal_codes() const noexcept { return postal_; }

  const GazetteerEntry* find(std::int64_t geoname_id) const;
  /// Feature-class-P entries whose name, ascii name or any alternate name
  /// equals `name` case-insensitively.
  std::vector<const GazetteerEntry*> places_named(std::string_view name) const;
  /// The ADM1 entry for (country, admin1), if loaded.
  const GazetteerEntry* admin1(std::string_view country_code, std::string_view admin1_code) const;
  /// The country entry (feature code PCL*) for an ISO country code.
  const GazetteerEntry* country(std::string_view country_code) const;

  const GazetteerEntry* nearest_place(const GeoPoint& p, double max_km) const;
  const PostalCodeEntry* nearest_postal(const GeoPoint& p, double max_km) const;

 private:
  using CellKey = std::pair<int, int>;
  struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept {
      return std::hash<long long>()((static_cast<long long>(k.first) << 32) ^ (k.second & 0xffffffff));
    }
  };
  using Grid = std::unordered_map<CellKey, std::vector<std::size_t>, CellHash>;

  static CellKey cell_of(const GeoPoint& p) noexcept;
  template <typename Entry, typename Less>
  const Entry* nearest(const std::vector<Entry>& items, const Grid& grid, const GeoPoint& p,
                       double max_km, Less less) const;

  std::vector<GazetteerEntry> places_;
  std::vector<PostalCodeEntry> postal_;
  std::unordered_map<std::int64_t, std::size_t> by_id_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_name_;
  std::map<std::pair<std::string, std::string>, std::size_t> admin1_;
  std::map<std::string, std::size_t> countries_;
  Grid place_grid_;  // feature class P only
  Grid postal_grid_;
};

/// Parses the three tab-separated files. Lines with the wrong column count or
/// unparseable numbers throw FormatError with the 1-based line number.
/// Entries whose feature class is not P or A are skipped.
GazetteerIndex load_gazetteer(const std::filesystem::path& place_file,
                              const std::filesystem::path& alt_names_file,
                              const std::filesystem::path& postal_file);

/// In-memory variants of the loaders, used by load_gazetteer and tests.
std::vector<GazetteerEntry> parse_places(std::string_view text);
void parse_alternate_names(std::string_view text, std::vector<GazetteerEntry>& places);
std::vector<PostalCodeEntry> parse_postal_codes(std::string_view text);

std::optional<GazetteerRef> lookup_city_by_name(const GazetteerIndex& index, std::string_view name,
                                                const std::optional<GeoPoint>& hint);

std::optional<GazetteerRef> reverse_geocode(const GazetteerIndex& index, const GeoPoint& p,
                                            double max_km);

std::optional<std::string> postal_code_for(const GazetteerIndex& index, const GeoPoint& p,
                                           double max_km);

/// One name per requested language, taking the first listed alternate name
/// in that language. Throws UnknownId.
std::map<std::string, std::string> alternate_names_for(const GazetteerIndex& index,
                                                       std::int64_t geoname_id,
                                                       const std::set<std::string>& langs);

struct EnrichConfig {
  std::set<std::string> languages = {"en", "uk", "nl", "fr"};
  double reverse_max_km = 30.0;
  double postal_max_km = 15.0;
  /// A city resolved by name must lie within this distance of the event's
  /// coordinates; otherwise coordinates win.
  double name_max_km = 50.0;
};

EnrichConfig enrich_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EnrichConfig& cfg);

/// Fills missing place fields. Precedence per field: override table, then
/// name lookup with the event point as hint, then reverse geocoding. Fields
/// already resolved are left untouched, so the function is idempotent.
Event enrich_event(const GazetteerIndex& index, const OverrideTable& overrides, Event ev,
                   const EnrichConfig& cfg);

struct EnrichStats {
  std::size_t events = 0;
  std::size_t missing_country = 0;
  std::size_t missing_city = 0;
  std::size_t missing_province = 0;
  std::size_t missing_postal_code = 0;
  std::size_t city_from_coordinates = 0;
};

EnrichStats enrich_all(const GazetteerIndex& index, const OverrideTable& overrides,
                       std::vector<Event>& events, const EnrichConfig& cfg);

}  // namespace l4r::gazetteer
