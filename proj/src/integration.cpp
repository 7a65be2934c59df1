#include "l4r/integration.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "l4r/csv_writer.hpp"
#include "l4r/gazetteer.hpp"
#include "l4r/ingest.hpp"
#include "l4r/rdf.hpp"
#include "l4r/text.hpp"
#include "l4r/url.hpp"

namespace l4r::integration {

namespace {

struct Block {
  std::size_t i;
  std::size_t j;
  std::size_t size;
};

// Longest common block in a[alo, ahi) x b[blo, bhi). Among equally long
// blocks the one starting earliest in a wins, then earliest in b.
Block longest_match(std::u32string_view a, std::u32string_view b, std::size_t alo, std::size_t ahi,
                    std::size_t blo, std::size_t bhi) {
  Block best{alo, blo, 0};
  const std::size_t width = bhi - blo;
  std::vector<std::size_t> prev(width + 1, 0);
  std::vector<std::size_t> cur(width + 1, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      const std::size_t col = j - blo + 1;
      if (a[i] == b[j]) {
        const std::size_t k = prev[col - 1] + 1;
        cur[col] = k;
        if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
      } else {
        cur[col] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

bool contains(std::string_view haystack, std::string_view needle) {
  return !needle.empty() && haystack.find(needle) != std::string_view::npos;
}

std::string city_name_key(const Event& ev) {
  std::string name;
  if (ev.city_text) {
    name = *ev.city_text;
  } else if (ev.city) {
    name = ev.city->preferred_name;
  }
  return utf8_lower(ingest::clean_location_string(name));
}

bool beats(const MatchPair& x, const MatchPair& y) {
  if (x.similarity != y.similarity) return x.similarity > y.similarity;
  if (x.distance_km != y.distance_km) return x.distance_km < y.distance_km;
  return std::tie(x.a, x.b) < std::tie(y.a, y.b);
}

std::string fixed6(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
  return std::string(buf, end);
}

}  // namespace

void MatchConfig::validate() const {
  for (double s : {sim_link, sim_area, sim_keyword}) {
    if (!(s >= 0.0 && s <= 1.0)) throw Error("match config: similarity thresholds must lie in [0, 1]");
  }
  for (double d : {dist_link_km, dist_area_km, dist_keyword_km}) {
    if (!(d > 0.0)) throw Error("match config: distance thresholds must be positive");
  }
  for (const auto& k : keywords) {
    if (k.empty() || utf8_lower(k) != k) throw Error("match config: keywords must be non-empty lowercase");
  }
  if (area_token.empty() || utf8_lower(area_token) != area_token) {
    throw Error("match config: area_token must be non-empty lowercase");
  }
}

MatchConfig match_config_from_json(const nlohmann::json& j) {
  MatchConfig cfg;
  cfg.sim_link = j.value("sim_link", cfg.sim_link);
  cfg.sim_area = j.value("sim_area", cfg.sim_area);
  cfg.sim_keyword = j.value("sim_keyword", cfg.sim_keyword);
  cfg.dist_link_km = j.value("dist_link_km", cfg.dist_link_km);
  cfg.dist_area_km = j.value("dist_area_km", cfg.dist_area_km);
  cfg.dist_keyword_km = j.value("dist_keyword_km", cfg.dist_keyword_km);
  cfg.keywords = j.value("keywords", cfg.keywords);
  cfg.area_token = j.value("area_token", cfg.area_token);
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const MatchConfig& cfg) {
  return {{"sim_link", cfg.sim_link},         {"sim_area", cfg.sim_area},
          {"sim_keyword", cfg.sim_keyword},   {"dist_link_km", cfg.dist_link_km},
          {"dist_area_km", cfg.dist_area_km}, {"dist_keyword_km", cfg.dist_keyword_km},
          {"keywords", cfg.keywords},         {"area_token", cfg.area_token}};
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Identical: return "Identical";
    case Verdict::NearDistinct: return "NearDistinct";
    case Verdict::Unclassified: return "Unclassified";
  }
  return "";
}

std::string_view to_string(Rule r) noexcept {
  switch (r) {
    case Rule::SharedLink: return "SharedLink";
    case Rule::Area: return "Area";
    case Rule::Keyword: return "Keyword";
    case Rule::None: return "None";
  }
  return "";
}

std::size_t matched_characters(std::u32string_view a, std::u32string_view b) {
  std::size_t total = 0;
  struct Range {
    std::size_t alo, ahi, blo, bhi;
  };
  std::vector<Range> todo{{0, a.size(), 0, b.size()}};
  while (!todo.empty()) {
    const auto r = todo.back();
    todo.pop_back();
    if (r.alo >= r.ahi || r.blo >= r.bhi) continue;
    const auto m = longest_match(a, b, r.alo, r.ahi, r.blo, r.bhi);
    if (m.size == 0) continue;
    total += m.size;
    todo.push_back({r.alo, m.i, r.blo, m.j});
    todo.push_back({m.i + m.size, r.ahi, m.j + m.size, r.bhi});
  }
  return total;
}

double similarity(std::string_view a, std::string_view b) {
  const auto la = lower(utf8_decode(a));
  const auto lb = lower(utf8_decode(b));
  const std::size_t total = la.size() + lb.size();
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(matched_characters(la, lb)) / static_cast<double>(total);
}

std::vector<Candidate> candidate_pairs(const std::vector<Event>& A, const std::vector<Event>& B) {
  std::map<CivilDate, std::vector<std::size_t>> b_by_date;
  for (std::size_t j = 0; j < B.size(); ++j) b_by_date[B[j].date].push_back(j);

  std::vector<std::string> b_names(B.size());
  for (std::size_t j = 0; j < B.size(); ++j) b_names[j] = city_name_key(B[j]);

  std::vector<Candidate> out;
  for (std::size_t i = 0; i < A.size(); ++i) {
    const auto it = b_by_date.find(A[i].date);
    if (it == b_by_date.end()) continue;
    const auto a_name = city_name_key(A[i]);
    for (auto j : it->second) {
      if (A[i].city && B[j].city) {
        if (A[i].city->geoname_id == B[j].city->geoname_id) {
          out.push_back({i, j, CityMatch::GeoNamesId});
        }
      } else if (!a_name.empty() && a_name == b_names[j]) {
        out.push_back({i, j, CityMatch::Name});
      }
    }
  }
  return out;
}

bool shares_link(const Event& a, const Event& b) {
  std::set<std::string> urls;
  for (const auto& u : a.source_urls) urls.insert(normalize_url(u));
  return std::any_of(b.source_urls.begin(), b.source_urls.end(),
                     [&](const std::string& u) { return urls.contains(normalize_url(u)); });
}

MatchPair classify_pair(const Event& a, const Event& b, const MatchConfig& cfg,
                        CityMatch city_match) {
  MatchPair pair;
  pair.a = key_of(a);
  pair.b = key_of(b);
  pair.city_match = city_match;
  pair.distance_km = gazetteer::haversine_km(a.point, b.point);
  const auto da = utf8_lower(a.description.value_or(""));
  const auto db = utf8_lower(b.description.value_or(""));
  pair.similarity = similarity(da, db);
  const double s = pair.similarity;
  const double d = pair.distance_km;

  if (shares_link(a, b) && s > cfg.sim_link && d < cfg.dist_link_km) {
    pair.verdict = Verdict::Identical;
    pair.rule = Rule::SharedLink;
    return pair;
  }

  const bool area = contains(da, cfg.area_token) || contains(db, cfg.area_token);
  const bool keyword = std::any_of(cfg.keywords.begin(), cfg.keywords.end(), [&](const std::string& k) {
    return contains(da, k) || contains(db, k);
  });
  const bool area_identical = area && s > cfg.sim_area && d < cfg.dist_area_km;
  const bool keyword_identical = keyword && s > cfg.sim_keyword && d < cfg.dist_keyword_km;

  if (area_identical) {
    pair.verdict = Verdict::Identical;
    pair.rule = Rule::Area;
  } else if (keyword_identical) {
    pair.verdict = Verdict::Identical;
    pair.rule = Rule::Keyword;
  } else if (area) {
    pair.verdict = Verdict::NearDistinct;
    pair.rule = Rule::Area;
  } else if (keyword) {
    pair.verdict = Verdict::NearDistinct;
    pair.rule = Rule::Keyword;
  }
  return pair;
}

std::size_t richness(const Event& ev) {
  return static_cast<std::size_t>(ev.description.has_value()) + ev.country.has_value() +
         ev.city.has_value() + ev.province.has_value() + ev.postal_code.has_value() +
         ev.source_urls.size() + ev.comments.size() + ev.city_labels.size();
}

EventKey choose_primary(const Event& a, const Event& b) {
  const auto ra = richness(a);
  const auto rb = richness(b);
  if (ra != rb) return ra > rb ? key_of(a) : key_of(b);
  if (b.dataset == Dataset::EOR && a.dataset != Dataset::EOR) return key_of(b);
  return key_of(a);
}

std::string aggregate_iri(std::vector<EventKey> members) {
  std::vector<std::string> iris;
  iris.reserve(members.size());
  for (const auto& m : members) iris.push_back(rdf::event_iri(m.dataset, m.id));
  std::sort(iris.begin(), iris.end());
  std::string joined;
  for (const auto& iri : iris) {
    joined += iri;
    joined += '\n';
  }
  return std::string(rdf::kEventBase) + "aggregate/" + sha256_hex(joined);
}

IntegrationResult integrate(const std::vector<Event>& A, const std::vector<Event>& B,
                            const MatchConfig& cfg) {
  cfg.validate();
  IntegrationResult result;
  const auto candidates = candidate_pairs(A, B);
  result.pairs.reserve(candidates.size());
  for (const auto& c : candidates) {
    result.pairs.push_back(classify_pair(A[c.a], B[c.b], cfg, c.city_match));
  }

  // One-to-one matching: the strongest Identical pair claims both events.
  std::vector<std::size_t> identical;
  for (std::size_t k = 0; k < result.pairs.size(); ++k) {
    if (result.pairs[k].verdict == Verdict::Identical) identical.push_back(k);
  }
  std::sort(identical.begin(), identical.end(), [&](std::size_t x, std::size_t y) {
    return beats(result.pairs[x], result.pairs[y]);
  });
  std::set<EventKey> claimed;
  std::map<EventKey, std::size_t> pair_of_a;
  for (auto k : identical) {
    auto& p = result.pairs[k];
    if (claimed.contains(p.a) || claimed.contains(p.b)) {
      p.verdict = Verdict::Unclassified;
      continue;
    }
    claimed.insert(p.a);
    claimed.insert(p.b);
    pair_of_a.emplace(p.a, k);
  }

  std::map<EventKey, const Event*> b_events;
  for (const auto& ev : B) b_events.emplace(key_of(ev), &ev);

  for (const auto& ev : A) {
    const auto key = key_of(ev);
    AggregateEvent agg;
    if (const auto it = pair_of_a.find(key); it != pair_of_a.end()) {
      const auto& p = result.pairs[it->second];
      agg.members = {p.a, p.b};
      agg.primary = choose_primary(ev, *b_events.at(p.b));
    } else {
      agg.members = {key};
      agg.primary = key;
    }
    agg.iri = aggregate_iri(agg.members);
    result.aggregates.push_back(std::move(agg));
  }
  for (const auto& ev : B) {
    const auto key = key_of(ev);
    if (claimed.contains(key)) continue;
    AggregateEvent agg;
    agg.members = {key};
    agg.primary = key;
    agg.iri = aggregate_iri(agg.members);
    result.aggregates.push_back(std::move(agg));
  }

  result.counts.a = A.size();
  result.counts.b = B.size();
  result.counts.identical = pair_of_a.size();
  result.counts.near_distinct = static_cast<std::size_t>(
      std::count_if(result.pairs.begin(), result.pairs.end(),
                    [](const MatchPair& p) { return p.verdict == Verdict::NearDistinct; }));
  result.counts.integrated = result.aggregates.size();
  return result;
}

std::string pairs_to_csv(const std::vector<MatchPair>& pairs) {
  CsvWriter csv;
  csv.row({"a_id", "b_id", "verdict", "rule", "distance_km", "similarity"});
  for (const auto& p : pairs) {
    csv.row({p.a.id, p.b.id, std::string(to_string(p.verdict)), std::string(to_string(p.rule)),
             fixed6(p.distance_km), fixed6(p.similarity)});
  }
  return csv.str();
}

}  // namespace l4r::integration
