#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "l4r/gazetteer.hpp"
#include "l4r/ingest.hpp"
#include "l4r/integration.hpp"
#include "l4r/model.hpp"
#include "l4r/rdf.hpp"

namespace l4r::test {

namespace fs = std::filesystem;

fs::path fixture(const std::string& relative);
std::string read_text(const fs::path& file);

/// Main gazetteer (integration fixture cities, admin1 and country entries).
gazetteer::GazetteerIndex main_gazetteer();
gazetteer::OverrideTable main_overrides();
/// Ten populated places only.
gazetteer::GazetteerIndex lookup_gazetteer();
gazetteer::OverrideTable lookup_overrides();

ingest::AdapterConfig eor_adapter();
ingest::AdapterConfig ch_adapter();

struct IntegrationFixture {
  std::vector<Event> a;  // EoR
  std::vector<Event> b;  // CH
};

/// The 50 + 20 event fixture, ingested and (optionally) enriched.
IntegrationFixture integration_fixture(bool enriched = true);

struct ExpectedPair {
  std::string a_id;
  std::string b_id;
  std::string verdict;
  std::string rule;
  double distance_km = 0.0;
  double similarity = 0.0;
};

std::vector<ExpectedPair> expected_pairs();

/// Triples of the integrated fixture after an N-Triples round trip.
std::vector<rdf::Triple> integrated_fixture_triples();
/// Integrated dataset of the fixture, reloaded from its N-Triples form.
IntegratedDataset integrated_fixture();

/// Random but valid events for round-trip tests. Ids are unique per dataset.
std::vector<Event> random_events(std::mt19937_64& rng, std::size_t n);
std::string random_string(std::mt19937_64& rng, std::string_view alphabet, std::size_t max_len);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

}  // namespace l4r::test
