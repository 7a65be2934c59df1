#include "fixtures.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "l4r/ingest.hpp"
#include "l4r/rdf.hpp"

namespace l4r::test {

fs::path fixture(const std::string& relative) { return fs::path(L4R_FIXTURES) / relative; }

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

gazetteer::GazetteerIndex load_dir(const std::string& dir) {
  return gazetteer::load_gazetteer(fixture(dir + "/places.tsv"), fixture(dir + "/alternate_names.tsv"),
                                   fixture(dir + "/postal_codes.tsv"));
}

}  // namespace

gazetteer::GazetteerIndex main_gazetteer() { return load_dir("gazetteer"); }
gazetteer::GazetteerIndex lookup_gazetteer() { return load_dir("lookup"); }

gazetteer::OverrideTable main_overrides() {
  return gazetteer::override_table_from_json(
      nlohmann::json::parse(read_text(fixture("gazetteer/overrides.json"))));
}

gazetteer::OverrideTable lookup_overrides() {
  return gazetteer::override_table_from_json(
      nlohmann::json::parse(read_text(fixture("lookup/overrides.json"))));
}

ingest::AdapterConfig eor_adapter() {
  return ingest::adapter_config_from_json(
      nlohmann::json::parse(read_text(fixture("integration/eor_adapter.json"))));
}

ingest::AdapterConfig ch_adapter() {
  return ingest::adapter_config_from_json(
      nlohmann::json::parse(read_text(fixture("integration/ch_adapter.json"))));
}

IntegrationFixture integration_fixture(bool enriched) {
  auto a = ingest::ingest(read_text(fixture("integration/eor.json")), Dataset::EOR,
                          ingest::Format::JSON, eor_adapter());
  auto b = ingest::ingest(read_text(fixture("integration/ch.csv")), Dataset::CH, ingest::Format::CSV,
                          ch_adapter());
  if (!a.rejected.empty() || !b.rejected.empty()) throw Error("integration fixture has rejects");
  IntegrationFixture fx{std::move(a.events), std::move(b.events)};
  if (enriched) {
    const auto index = main_gazetteer();
    const auto overrides = main_overrides();
    const gazetteer::EnrichConfig cfg;
    gazetteer::enrich_all(index, overrides, fx.a, cfg);
    gazetteer::enrich_all(index, overrides, fx.b, cfg);
  }
  return fx;
}

std::vector<ExpectedPair> expected_pairs() {
  const auto rows = ingest::parse_csv(read_text(fixture("integration/expected_pairs.csv")));
  std::vector<ExpectedPair> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out.push_back({r.at(0), r.at(1), r.at(2), r.at(3), std::stod(r.at(4)), std::stod(r.at(5))});
  }
  return out;
}

std::vector<rdf::Triple> integrated_fixture_triples() {
  const auto fx = integration_fixture();
  const auto result = integration::integrate(fx.a, fx.b, integration::MatchConfig{});
  std::vector<rdf::Triple> triples;
  for (const auto* side : {&fx.a, &fx.b}) {
    for (const auto& ev : *side) {
      auto t = rdf::emit_event_triples(ev);
      triples.insert(triples.end(), t.begin(), t.end());
    }
  }
  for (const auto& agg : result.aggregates) {
    auto t = rdf::emit_aggregate_triples(agg);
    triples.insert(triples.end(), t.begin(), t.end());
  }
  return rdf::parse_ntriples(rdf::serialize(triples, rdf::Format::NTriples));
}

IntegratedDataset integrated_fixture() { return rdf::read_integrated(integrated_fixture_triples()); }

std::string random_string(std::mt19937_64& rng, std::string_view alphabet, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s += alphabet[pick(rng)];
  return s;
}

std::vector<Event> random_events(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> pieces = {
      "shelling", " ", "Kharkiv", "\"quoted\"", "back\\slash", "line\nbreak", "tab\there",
      "Харків", "école", "área", "<tag>", "50%", "cr\rlf", "#hash", "a b", "Ізюм"};
  static const std::vector<std::string> langs = {"en", "uk", "nl", "fr"};
  std::uniform_real_distribution<double> lat(-90.0, 90.0);
  std::uniform_real_distribution<double> lon(-180.0, 180.0);
  std::uniform_int_distribution<int> year(2022, 2023), month(1, 12), day(1, 28), coin(0, 1),
      small(0, 3), piece(0, static_cast<int>(pieces.size()) - 1);
  auto text = [&] {
    std::string s;
    const int k = 1 + small(rng);
    for (int i = 0; i < k; ++i) s += pieces[piece(rng)];
    return s;
  };

  std::vector<Event> out;
  for (std::size_t i = 0; i < n; ++i) {
    Event ev;
    ev.dataset = coin(rng) ? Dataset::EOR : Dataset::CH;
    ev.id = "r" + std::to_string(i) + (coin(rng) ? " x/y" : "");
    ev.date = {year(rng), month(rng), day(rng)};
    ev.point = validate_point(lat(rng), lon(rng));
    if (coin(rng)) ev.description = text();
    if (coin(rng)) ev.city = GazetteerRef{100000 + static_cast<std::int64_t>(i), text()};
    if (coin(rng)) ev.province = GazetteerRef{200000 + static_cast<std::int64_t>(i), text()};
    if (coin(rng)) ev.country = GazetteerRef{690791, "Ukraine"};
    if (coin(rng)) ev.postal_code = std::to_string(10000 + i);
    for (int k = small(rng); k > 0; --k) {
      ev.source_urls.push_back("https://example.org/e/" + std::to_string(i) + "/" + std::to_string(k));
    }
    for (int k = small(rng); k > 0; --k) ev.comments.push_back(text());
    for (const auto& l : langs) {
      if (coin(rng)) ev.city_labels[l] = text();
    }
    out.push_back(std::move(ev));
  }
  return out;
}

TempDir::TempDir() {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto p = fs::temp_directory_path() / ("l4r-test-" + std::to_string(rd()));
    if (fs::create_directory(p)) {
      path_ = p;
      return;
    }
  }
  throw Error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

}  // namespace l4r::test
