#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "l4r/gazetteer.hpp"
#include "l4r/integration.hpp"
#include "oracles.hpp"

namespace l4r::integration {
namespace {

Event make(Dataset ds, std::string id, std::string description, double lat, double lon = 36.2304) {
  Event ev;
  ev.dataset = ds;
  ev.id = std::move(id);
  ev.date = {2022, 3, 7};
  ev.point = validate_point(lat, lon);
  ev.description = std::move(description);
  ev.city = GazetteerRef{706482, "Kharkiv"};
  return ev;
}

// Latitude offset (degrees) giving `km` due north on the haversine sphere.
double north(double km) { return km / (6371.0 * 3.14159265358979323846 / 180.0); }

TEST(Similarity, Examples) {
  EXPECT_EQ(similarity("abcd", "bcde"), 0.75);
  EXPECT_EQ(similarity("", "x"), 0.0);
  EXPECT_EQ(similarity("", ""), 1.0);
  EXPECT_EQ(similarity("Shelling", "shelling"), 1.0);
  EXPECT_EQ(similarity("Харків", "ХАРКІВ"), 1.0);
}

TEST(Similarity, FrozenDifflibValues) {
  EXPECT_NEAR(similarity("Missile strike hit the regional administration in Kharkiv",
                         "Regional administration in Kharkiv hit by missile strike"),
              0.601770, 5e-7);
  EXPECT_NEAR(similarity("Airstrike destroyed school No. 18 in Chernihiv",
                         "Airstrike destroyed school #18, Chernihiv"),
              0.896552, 5e-7);
}

TEST(Similarity, MatchesBruteForce) {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 3000; ++i) {
    const auto a = test::random_string(rng, "abcAB ", 12);
    const auto b = test::random_string(rng, "abcAB ", 12);
    ASSERT_EQ(similarity(a, b), oracle::brute_force_ratio(a, b)) << a << " | " << b;
  }
}

TEST(Similarity, RangeAndReflexivity) {
  std::mt19937_64 rng(103);
  for (int i = 0; i < 1000; ++i) {
    const auto a = test::random_string(rng, "xyzXYZ-", 20);
    const auto b = test::random_string(rng, "xyzXYZ-", 20);
    const double s = similarity(a, b);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    if (!a.empty()) EXPECT_EQ(similarity(a, a), 1.0);
  }
}

TEST(CandidatePairs, SameCityAndDateOnly) {
  auto a = make(Dataset::EOR, "a", "x", 50.0);
  auto b = make(Dataset::CH, "b", "x", 50.0);
  auto late = make(Dataset::CH, "late", "x", 50.0);
  late.date = {2022, 3, 8};
  auto other = make(Dataset::CH, "other", "x", 50.0);
  other.city = GazetteerRef{707292, "Izyum"};
  const auto c = candidate_pairs({a}, {b, late, other});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].b, 0u);
  EXPECT_EQ(c[0].city_match, CityMatch::GeoNamesId);
}

TEST(CandidatePairs, NameFallbackAndMissingCities) {
  auto a = make(Dataset::EOR, "a", "x", 50.0);
  a.city.reset();
  a.city_text = "Kharkiv ";
  auto b = make(Dataset::CH, "b", "x", 50.0);
  b.city_text = "kharkiv";
  auto none_a = make(Dataset::EOR, "na", "x", 50.0);
  none_a.city.reset();
  auto none_b = make(Dataset::CH, "nb", "x", 50.0);
  none_b.city.reset();
  const auto c = candidate_pairs({a, none_a}, {b, none_b});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].a, 0u);
  EXPECT_EQ(c[0].city_match, CityMatch::Name);
}

TEST(SharesLink, Normalization) {
  auto a = make(Dataset::EOR, "a", "x", 50.0);
  auto b = make(Dataset::CH, "b", "x", 50.0);
  a.source_urls = {"https://t.me/p/1"};
  b.source_urls = {"https://t.me/p/1"};
  EXPECT_TRUE(shares_link(a, b));
  a.source_urls = {"https://X/p/1"};
  b.source_urls = {"https://x/p/1/"};
  EXPECT_TRUE(shares_link(a, b));
  b.source_urls = {"https://x/p/2"};
  EXPECT_FALSE(shares_link(a, b));
  b.source_urls.clear();
  EXPECT_FALSE(shares_link(a, b));
}

TEST(ClassifyPair, SharedLinkBranch) {
  // similarity 0.60 via 3 of 5 characters each side
  auto a = make(Dataset::EOR, "a", "abcxy", 50.0);
  auto b = make(Dataset::CH, "b", "abczw", 50.0 + north(1.5));
  a.source_urls = b.source_urls = {"https://t.me/x/1"};
  const auto p = classify_pair(a, b, MatchConfig{});
  EXPECT_DOUBLE_EQ(p.similarity, 0.6);
  EXPECT_EQ(p.verdict, Verdict::Identical);
  EXPECT_EQ(p.rule, Rule::SharedLink);
}

TEST(ClassifyPair, AreaBranch) {
  const std::string da = "shelled area near the market, many hurt";
  const std::string db = "shelled area near the market; many injured";
  const double s = similarity(da, db);
  ASSERT_GT(s, 0.75);
  const auto p = classify_pair(make(Dataset::EOR, "a", da, 50.0), make(Dataset::CH, "b", db, 50.0 + north(1.9)),
                               MatchConfig{});
  EXPECT_EQ(p.verdict, Verdict::Identical);
  EXPECT_EQ(p.rule, Rule::Area);
  const auto far = classify_pair(make(Dataset::EOR, "a", da, 50.0), make(Dataset::CH, "b", db, 50.0 + north(2.1)),
                                 MatchConfig{});
  EXPECT_EQ(far.verdict, Verdict::NearDistinct);
  EXPECT_EQ(far.rule, Rule::Area);
}

TEST(ClassifyPair, KeywordNearMiss) {
  // s = 0.60, d = 1.2: passes similarity, fails the 1 km bound
  auto a = make(Dataset::EOR, "a", "hospital destroyed", 50.0);
  auto b = make(Dataset::CH, "b", "hospital destroyed", 50.0 + north(1.2));
  a.description = "hospitalxy";
  b.description = "hospitzwvu";
  const auto p = classify_pair(a, b, MatchConfig{});
  EXPECT_DOUBLE_EQ(p.similarity, 0.6);
  EXPECT_NEAR(p.distance_km, 1.2, 1e-9);
  EXPECT_EQ(p.verdict, Verdict::NearDistinct);
  EXPECT_EQ(p.rule, Rule::Keyword);
}

TEST(ClassifyPair, AreaMissFallsThroughToKeywordMatch) {
  // Area fails on similarity, keyword branch then succeeds: Identical wins.
  const std::string da = "school in the area hit";
  const std::string db = "school in this area was hit";
  const double s = similarity(da, db);
  ASSERT_GT(s, 0.55);
  ASSERT_LE(s, 0.9);
  MatchConfig cfg;
  cfg.sim_area = 0.99;
  const auto p = classify_pair(make(Dataset::EOR, "a", da, 50.0), make(Dataset::CH, "b", db, 50.0 + north(0.5)), cfg);
  EXPECT_EQ(p.verdict, Verdict::Identical);
  EXPECT_EQ(p.rule, Rule::Keyword);
}

TEST(ClassifyPair, NothingFires) {
  auto a = make(Dataset::EOR, "a", "tank column", 50.0);
  a.description.reset();
  const auto p = classify_pair(a, make(Dataset::CH, "b", "convoy", 50.0), MatchConfig{});
  EXPECT_EQ(p.verdict, Verdict::Unclassified);
  EXPECT_EQ(p.rule, Rule::None);
  EXPECT_EQ(p.similarity, 0.0);
}

TEST(ClassifyPair, StrictInequalities) {
  auto a = make(Dataset::EOR, "a", "abcxy", 50.0);
  auto b = make(Dataset::CH, "b", "abczw", 50.0);
  a.source_urls = b.source_urls = {"https://t.me/x/1"};
  MatchConfig cfg;
  cfg.sim_link = 0.6;
  EXPECT_EQ(classify_pair(a, b, cfg).verdict, Verdict::Unclassified);
}

TEST(ChoosePrimary, RichnessThenEor) {
  auto a = make(Dataset::EOR, "a", "x", 50.0);
  auto b = make(Dataset::CH, "b", "x", 50.0);
  a.source_urls = {"https://1", "https://2"};
  EXPECT_EQ(choose_primary(a, b).id, "a");
  b.comments = {"1", "2", "3"};
  EXPECT_EQ(choose_primary(a, b).id, "b");
  a.source_urls.clear();
  b.comments.clear();
  EXPECT_EQ(choose_primary(a, b).id, "a");
  EXPECT_EQ(choose_primary(b, a).id, "a");
}

TEST(ChoosePrimary, CountsEachItem) {
  auto a = make(Dataset::EOR, "a", "x", 50.0);
  a.country = GazetteerRef{690791, "Ukraine"};
  a.province = GazetteerRef{706483, "Kharkivska Oblast"};
  a.postal_code = "61000";
  a.source_urls = {"https://1"};
  a.comments = {"c"};
  a.city_labels = {{"en", "Kharkiv"}, {"uk", "Харків"}};
  EXPECT_EQ(richness(a), 9u);
}

TEST(AggregateIri, OrderIndependent) {
  const EventKey a{Dataset::EOR, "1"}, b{Dataset::CH, "2"};
  EXPECT_EQ(aggregate_iri({a, b}), aggregate_iri({b, a}));
  EXPECT_NE(aggregate_iri({a}), aggregate_iri({b}));
  EXPECT_TRUE(aggregate_iri({a}).starts_with("https://linked4resilience.eu/event/aggregate/"));
}

TEST(Integrate, PlantedFixtureMatchesFrozenPairs) {
  const auto fx = test::integration_fixture();
  const auto result = integrate(fx.a, fx.b, MatchConfig{});
  std::map<std::pair<std::string, std::string>, MatchPair> got;
  for (const auto& p : result.pairs) got.emplace(std::pair{p.a.id, p.b.id}, p);
  const auto expected = test::expected_pairs();
  ASSERT_EQ(got.size(), expected.size());
  for (const auto& e : expected) {
    const auto it = got.find({e.a_id, e.b_id});
    ASSERT_NE(it, got.end()) << e.a_id << "," << e.b_id;
    EXPECT_EQ(to_string(it->second.verdict), e.verdict) << e.a_id;
    EXPECT_EQ(to_string(it->second.rule), e.rule) << e.a_id;
    EXPECT_NEAR(it->second.distance_km, e.distance_km, 5e-7) << e.a_id;
    EXPECT_NEAR(it->second.similarity, e.similarity, 5e-7) << e.a_id;
  }
  EXPECT_EQ(result.counts.a, 50u);
  EXPECT_EQ(result.counts.b, 20u);
  EXPECT_EQ(result.counts.identical, 5u);
  EXPECT_EQ(result.counts.near_distinct, 2u);
  EXPECT_EQ(result.counts.integrated, 65u);
  EXPECT_EQ(result.aggregates.size(), 65u);
}

TEST(Integrate, MykolaivPairUsesOverride) {
  const auto fx = test::integration_fixture();
  const auto result = integrate(fx.a, fx.b, MatchConfig{});
  for (const auto& p : result.pairs) {
    EXPECT_EQ(p.city_match, CityMatch::GeoNamesId);
  }
}

TEST(Integrate, EmptyB) {
  const auto fx = test::integration_fixture();
  const auto result = integrate(fx.a, {}, MatchConfig{});
  EXPECT_EQ(result.counts.identical, 0u);
  ASSERT_EQ(result.aggregates.size(), fx.a.size());
  for (std::size_t i = 0; i < fx.a.size(); ++i) {
    EXPECT_EQ(result.aggregates[i].members, std::vector<EventKey>{key_of(fx.a[i])});
  }
}

TEST(Integrate, ConflictKeepsMostSimilar) {
  const auto b = make(Dataset::CH, "b", "school hit by a strike", 50.0);
  const auto a1 = make(Dataset::EOR, "a1", "school hit by strike", 50.0 + north(0.2));
  const auto a2 = make(Dataset::EOR, "a2", "school hit by a strike!", 50.0 + north(0.3));
  const auto result = integrate({a1, a2}, {b}, MatchConfig{});
  ASSERT_EQ(result.pairs.size(), 2u);
  ASSERT_GT(result.pairs[1].similarity, result.pairs[0].similarity);
  EXPECT_EQ(result.pairs[0].verdict, Verdict::Unclassified);
  EXPECT_EQ(result.pairs[1].verdict, Verdict::Identical);
  EXPECT_EQ(result.counts.identical, 1u);
  EXPECT_EQ(result.counts.integrated, 2u);
}

TEST(Integrate, ConflictTieBreaksOnDistanceThenId) {
  const auto b = make(Dataset::CH, "b", "school hit", 50.0);
  const auto near = make(Dataset::EOR, "z", "school hit", 50.0 + north(0.2));
  const auto far = make(Dataset::EOR, "a", "school hit", 50.0 + north(0.4));
  auto result = integrate({far, near}, {b}, MatchConfig{});
  EXPECT_EQ(result.pairs[0].verdict, Verdict::Unclassified);
  EXPECT_EQ(result.pairs[1].verdict, Verdict::Identical);
  const auto twin = make(Dataset::EOR, "y", "school hit", 50.0 + north(0.2));
  result = integrate({near, twin}, {b}, MatchConfig{});
  EXPECT_EQ(result.pairs[1].verdict, Verdict::Identical);  // "y" < "z"
}

// Random worlds with few cities, dates and words so that candidates collide.
std::pair<std::vector<Event>, std::vector<Event>> random_world(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {"school", "area", "strike", "hit", "house", "the", "near", "shelled"};
  std::uniform_int_distribution<int> n_a(0, 15), n_b(0, 15), city(0, 2), day(1, 3), w(0, 7), len(0, 5), coin(0, 3);
  std::uniform_real_distribution<double> off(-0.02, 0.02);
  auto gen = [&](Dataset ds, int n) {
    std::vector<Event> out;
    for (int i = 0; i < n; ++i) {
      Event ev;
      ev.dataset = ds;
      ev.id = std::string(ds == Dataset::EOR ? "a" : "b") + std::to_string(i);
      ev.date = {2022, 3, day(rng)};
      const int c = city(rng);
      ev.city = GazetteerRef{700000 + c, "c" + std::to_string(c)};
      ev.point = validate_point(50.0 + c + off(rng), 36.0 + off(rng));
      std::string d;
      for (int k = len(rng); k > 0; --k) d += words[w(rng)] + " ";
      if (coin(rng)) ev.description = d;
      if (coin(rng) == 0) ev.source_urls = {"https://t.me/x/" + std::to_string(day(rng))};
      out.push_back(std::move(ev));
    }
    return out;
  };
  return {gen(Dataset::EOR, n_a(rng)), gen(Dataset::CH, n_b(rng))};
}

TEST(IntegrateProperties, RandomWorlds) {
  std::mt19937_64 rng(2024);
  const MatchConfig cfg;
  for (int round = 0; round < 300; ++round) {
    const auto [A, B] = random_world(rng);
    const auto r = integrate(A, B, cfg);
    EXPECT_EQ(r.counts.integrated, A.size() + B.size() - r.counts.identical);
    EXPECT_EQ(r.aggregates.size(), r.counts.integrated);

    std::map<EventKey, int> in_identical, in_aggregate;
    std::size_t identical = 0, near = 0;
    for (const auto& p : r.pairs) {
      if (p.verdict == Verdict::Identical) {
        ++identical;
        EXPECT_NE(p.rule, Rule::None);
        ++in_identical[p.a];
        ++in_identical[p.b];
        switch (p.rule) {
          case Rule::SharedLink:
            EXPECT_GT(p.similarity, cfg.sim_link);
            EXPECT_LT(p.distance_km, cfg.dist_link_km);
            break;
          case Rule::Area:
            EXPECT_GT(p.similarity, cfg.sim_area);
            EXPECT_LT(p.distance_km, cfg.dist_area_km);
            break;
          case Rule::Keyword:
            EXPECT_GT(p.similarity, cfg.sim_keyword);
            EXPECT_LT(p.distance_km, cfg.dist_keyword_km);
            break;
          case Rule::None:
            break;
        }
      }
      near += p.verdict == Verdict::NearDistinct;
      EXPECT_GE(p.similarity, 0.0);
      EXPECT_LE(p.similarity, 1.0);
    }
    EXPECT_EQ(identical, r.counts.identical);
    EXPECT_EQ(near, r.counts.near_distinct);
    for (const auto& [k, n] : in_identical) EXPECT_EQ(n, 1);
    for (const auto& agg : r.aggregates) {
      ASSERT_GE(agg.members.size(), 1u);
      ASSERT_LE(agg.members.size(), 2u);
      EXPECT_NE(std::find(agg.members.begin(), agg.members.end(), agg.primary), agg.members.end());
      if (agg.members.size() == 2) EXPECT_NE(agg.members[0].dataset, agg.members[1].dataset);
      for (const auto& m : agg.members) ++in_aggregate[m];
      EXPECT_EQ(agg.iri, aggregate_iri(agg.members));
    }
    EXPECT_EQ(in_aggregate.size(), A.size() + B.size());
    for (const auto& [k, n] : in_aggregate) EXPECT_EQ(n, 1);

    const auto again = integrate(A, B, cfg);
    EXPECT_EQ(again.aggregates, r.aggregates);
  }
}

TEST(IntegrateProperties, ClassifyIsPure) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 50; ++round) {
    const auto [A, B] = random_world(rng);
    for (const auto& c : candidate_pairs(A, B)) {
      const auto x = classify_pair(A[c.a], B[c.b], MatchConfig{}, c.city_match);
      const auto y = classify_pair(A[c.a], B[c.b], MatchConfig{}, c.city_match);
      EXPECT_EQ(x.verdict, y.verdict);
      EXPECT_EQ(x.rule, y.rule);
      EXPECT_EQ(x.similarity, y.similarity);
      EXPECT_EQ(x.distance_km, gazetteer::haversine_km(A[c.a].point, B[c.b].point));
    }
  }
}

TEST(PairsCsv, Format) {
  MatchPair p;
  p.a = {Dataset::EOR, "eor-1"};
  p.b = {Dataset::CH, "ch,1"};
  p.distance_km = 0.8;
  p.similarity = 0.6017699;
  p.verdict = Verdict::Identical;
  p.rule = Rule::SharedLink;
  EXPECT_EQ(pairs_to_csv({p}),
            "a_id,b_id,verdict,rule,distance_km,similarity\neor-1,\"ch,1\",Identical,SharedLink,0.800000,0.601770\n");
}

TEST(MatchConfigJson, RoundTripAndValidation) {
  MatchConfig cfg;
  cfg.keywords.push_back("bridge");
  const auto back = match_config_from_json(to_json(cfg));
  EXPECT_EQ(back.keywords, cfg.keywords);
  EXPECT_EQ(back.dist_keyword_km, 1.0);
  EXPECT_THROW(match_config_from_json({{"sim_area", 1.5}}), Error);
  EXPECT_THROW(match_config_from_json({{"dist_link_km", 0}}), Error);
  EXPECT_THROW(match_config_from_json({{"keywords", {"School"}}}), Error);
}

}  // namespace
}  // namespace l4r::integration
