#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "l4r/model.hpp"

namespace l4r::integration {

/// Thresholds for matching events across datasets. Similarities are
/// compared with '>', distances with '<'.
struct MatchConfig {
  double sim_link = 0.55;
  double sim_area = 0.75;
  double sim_keyword = 0.55;
  double dist_link_km = 2.0;
  double dist_area_km = 2.0;
  double dist_keyword_km = 1.0;
  /// Facility words that make a pair eligible for the keyword rule.
  /// Extend through the config file.
  std::vector<std::string> keywords = {"theater", "church",   "school", "hospital",
                                       "building", "house", "flat",   "station"};
  std::string area_token = "area";

  /// Throws Error on a violated invariant.
  void validate() const;
};

MatchConfig match_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MatchConfig& cfg);

enum class Verdict { Identical, NearDistinct, Unclassified };
enum class Rule { SharedLink, Area, Keyword, None };
enum class CityMatch { GeoNamesId, Name };

std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(Rule r) noexcept;

struct MatchPair {
  EventKey a;  // from the first dataset
  EventKey b;  // from the second dataset
  double distance_km = 0.0;
  double similarity = 0.0;
  Verdict verdict = Verdict::Unclassified;
  Rule rule = Rule::None;
  /// Whether the two events were paired by resolved city id or by name.
  CityMatch city_match = CityMatch::GeoNamesId;
};

/// Ratcliff/Obershelp ratio 2*M/T over lowercased code points, matching
/// difflib.SequenceMatcher(None, a, b, autojunk=False).ratio(). Two empty
/// strings give 1.0.
double similarity(std::string_view a, std::string_view b);

/// Total size of the matching blocks (the M above) for already-prepared
/// sequences.
std::size_t matched_characters(std::u32string_view a, std::u32string_view b);

struct Candidate {
  std::size_t a;  // index into A
  std::size_t b;  // index into B
  CityMatch city_match;
};

/// Cross-dataset pairs with the same date and the same city: equal city
/// geoname id when both are resolved, otherwise equal cleaned lowercased
/// city name (source text if present, else the resolved preferred name).
/// Ordered by a, then b.
std::vector<Candidate> candidate_pairs(const std::vector<Event>& A, const std::vector<Event>& B);

bool shares_link(const Event& a, const Event& b);

MatchPair classify_pair(const Event& a, const Event& b, const MatchConfig& cfg,
                        CityMatch city_match = CityMatch::GeoNamesId);

/// Number of populated optional items used to pick the primary source.
std::size_t richness(const Event& ev);
/// The richer event; ties go to the EOR member, then to `a`.
EventKey choose_primary(const Event& a, const Event& b);

struct Counts {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t identical = 0;      // |S|
  std::size_t near_distinct = 0;  // |T|
  std::size_t integrated = 0;     // |A| + |B| - |S|
};

struct IntegrationResult {
  std::vector<MatchPair> pairs;
  std::vector<AggregateEvent> aggregates;
  Counts counts;
};

/// `https://linked4resilience.eu/event/aggregate/{sha256 of sorted member IRIs}`
std::string aggregate_iri(std::vector<EventKey> members);

IntegrationResult integrate(const std::vector<Event>& A, const std::vector<Event>& B,
                            const MatchConfig& cfg);

/// CSV with header `a_id,b_id,verdict,rule,distance_km,similarity`.
std::string pairs_to_csv(const std::vector<MatchPair>& pairs);

}  // namespace l4r::integration
