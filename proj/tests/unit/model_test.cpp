#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "l4r/model.hpp"

namespace l4r {
namespace {

TEST(GeoPoint, AcceptsInRangeValues) {
  const auto p = validate_point(49.9935, 36.2304);
  EXPECT_DOUBLE_EQ(p.latitude(), 49.9935);
  EXPECT_DOUBLE_EQ(p.longitude(), 36.2304);
}

TEST(GeoPoint, BoundariesAreInclusive) {
  EXPECT_NO_THROW(validate_point(-90.0, 180.0));
  EXPECT_NO_THROW(validate_point(90.0, -180.0));
}

TEST(GeoPoint, LatitudeOutOfRangeNamesAxis) {
  try {
    validate_point(91.0, 0.0);
    FAIL();
  } catch (const OutOfRange& e) {
    EXPECT_EQ(e.axis(), OutOfRange::Axis::Latitude);
  }
}

TEST(GeoPoint, LatitudeIsReportedFirst) {
  try {
    validate_point(-91.0, 200.0);
    FAIL();
  } catch (const OutOfRange& e) {
    EXPECT_EQ(e.axis(), OutOfRange::Axis::Latitude);
  }
  try {
    validate_point(0.0, 180.5);
    FAIL();
  } catch (const OutOfRange& e) {
    EXPECT_EQ(e.axis(), OutOfRange::Axis::Longitude);
  }
}

TEST(GeoPoint, RejectsNaN) {
  EXPECT_THROW(validate_point(std::nan(""), 0.0), OutOfRange);
  EXPECT_THROW(validate_point(0.0, std::nan("")), OutOfRange);
}

TEST(CivilDate, DiscardsTimeOfDay) {
  EXPECT_EQ(parse_civil_date("2022-03-07T00:00:00"), (CivilDate{2022, 3, 7}));
  EXPECT_EQ(parse_civil_date("2022-03-07T23:59:59+02:00"), (CivilDate{2022, 3, 7}));
  EXPECT_EQ(parse_civil_date("2022-03-07 10:00"), (CivilDate{2022, 3, 7}));
}

TEST(CivilDate, PlainDate) { EXPECT_EQ(parse_civil_date("2022-03-07").to_string(), "2022-03-07"); }

TEST(CivilDate, ImpossibleDates) {
  EXPECT_THROW(parse_civil_date("2022-02-30"), InvalidDate);
  EXPECT_THROW(parse_civil_date("2022-13-01"), InvalidDate);
  EXPECT_THROW(parse_civil_date("2023-02-29"), InvalidDate);
  EXPECT_NO_THROW(parse_civil_date("2024-02-29"));
}

TEST(CivilDate, MalformedText) {
  for (const char* s : {"", "2022-3-7", "07.03.2022", "2022-03-07X", "abcd-ef-gh", "2022/03/07"}) {
    EXPECT_THROW(parse_civil_date(s), MalformedDate) << s;
  }
}

TEST(CivilDate, OrderingAndMonthKey) {
  EXPECT_LT((CivilDate{2022, 12, 31}), (CivilDate{2023, 1, 1}));
  EXPECT_EQ((CivilDate{2022, 3, 7}).month_key(), "2022-03");
}

TEST(Dataset, NamesRoundTrip) {
  EXPECT_EQ(parse_dataset_name("EoR"), Dataset::EOR);
  EXPECT_EQ(parse_dataset_name(to_string(Dataset::CH)), Dataset::CH);
  EXPECT_THROW(parse_dataset_name("acled"), Error);
}

TEST(GazetteerRef, IriDerivedFromId) {
  const GazetteerRef kharkiv{706483, "Kharkiv"};
  EXPECT_EQ(kharkiv.iri(), "http://sws.geonames.org/706483/");
  EXPECT_EQ(geoname_id_from_iri(kharkiv.iri()), 706483);
  EXPECT_EQ(geoname_id_from_iri("http://sws.geonames.org/x/"), std::nullopt);
  EXPECT_EQ(geoname_id_from_iri("https://example.org/706483/"), std::nullopt);
}

TEST(ContentId, StableAndSensitive) {
  const auto p = validate_point(50.0, 36.25);
  const CivilDate d{2022, 3, 7};
  const auto a = content_id(Dataset::EOR, d, p, std::string("x"));
  EXPECT_EQ(a.size(), 16u);
  EXPECT_EQ(a, content_id(Dataset::EOR, d, p, std::string("x")));
  EXPECT_NE(a, content_id(Dataset::CH, d, p, std::string("x")));
  EXPECT_NE(a, content_id(Dataset::EOR, d, p, std::nullopt));
}

TEST(Validators, UrlsAndLanguages) {
  EXPECT_TRUE(is_absolute_url("https://t.me/x/1"));
  EXPECT_FALSE(is_absolute_url("t.me/x/1"));
  EXPECT_FALSE(is_absolute_url("https://a b"));
  EXPECT_TRUE(is_language_code("uk"));
  EXPECT_FALSE(is_language_code("UK"));
  EXPECT_FALSE(is_language_code("ukr"));
}

TEST(EventJson, RoundTripsGeneratedEvents) {
  std::mt19937_64 rng(7);
  for (const auto& ev : test::random_events(rng, 200)) {
    EXPECT_EQ(event_from_json(to_json(ev)), ev);
  }
}

TEST(EventJson, RejectsInvariantViolations) {
  auto j = to_json(test::random_events(*std::make_unique<std::mt19937_64>(1), 1).front());
  auto bad = j;
  bad["lat"] = 95.0;
  EXPECT_THROW(event_from_json(bad), Error);
  bad = j;
  bad["date"] = "2022-02-30";
  EXPECT_THROW(event_from_json(bad), Error);
  bad = j;
  bad["city_labels"] = {{"english", "Kyiv"}};
  EXPECT_THROW(event_from_json(bad), Error);
}

TEST(IntegratedDataset, PrimariesFollowAggregates) {
  IntegratedDataset ds;
  Event a;
  a.id = "1";
  Event b;
  b.id = "2";
  b.dataset = Dataset::CH;
  ds.events = {a, b};
  ds.aggregates.push_back({"https://x/agg/1", {key_of(a), key_of(b)}, key_of(b)});
  const auto p = ds.primaries();
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0]->id, "2");
  ds.aggregates.push_back({"https://x/agg/2", {{Dataset::EOR, "9"}}, {Dataset::EOR, "9"}});
  EXPECT_THROW(ds.primaries(), Error);
}

}  // namespace
}  // namespace l4r
