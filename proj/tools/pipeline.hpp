#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "l4r/analytics.hpp"
#include "l4r/gazetteer.hpp"
#include "l4r/geonames_client.hpp"
#include "l4r/ingest.hpp"
#include "l4r/integration.hpp"
#include "l4r/linkcheck.hpp"

namespace l4r::cli {

namespace fs = std::filesystem;

/// Bad flags or flag combinations; exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kAccountEnv = "L4R_GEONAMES_ACCOUNT";

struct DatasetSource {
  std::optional<fs::path> input;
  ingest::Format format = ingest::Format::JSON;
  ingest::AdapterConfig adapter;
};

struct GazetteerFiles {
  fs::path places;
  fs::path alternate_names;
  fs::path postal_codes;
};

struct AnalyticsDefaults {
  std::vector<std::string> languages = {"en", "uk", "nl", "fr"};
  std::vector<std::string> months = analytics::default_months();
  std::optional<std::int64_t> uc1_city;
  std::string uc1_start = "2022-10-01";
  std::string uc1_end = "2023-02-28";
  std::string uc2_keyword = "school";
  std::size_t uc3_top_n = 5;
  std::string uc4_first_month = "2022-02";
  std::string uc4_last_month = "2022-12";
  std::size_t uc4_n = 3;
  std::optional<fs::path> uc5_deaths;
  std::optional<std::string> uc5_keyword;
  std::string uc5_first_month = "2022-04";
  std::string uc5_last_month = "2022-12";
  std::optional<fs::path> shelters;
  std::optional<std::int64_t> uc6_city;
  double shelter_radius_km = 1.0;
  double grid_cell_deg = 0.005;
};

struct PipelineConfig {
  std::map<Dataset, DatasetSource> datasets;
  std::optional<GazetteerFiles> gazetteer;
  std::optional<fs::path> overrides;
  gazetteer::EnrichConfig enrich;
  integration::MatchConfig match;
  AnalyticsDefaults analytics;
  gazetteer::ClientConfig online;
  linkcheck::CheckConfig linkcheck;
};

/// Relative paths resolve against `base_dir`; every referenced file must exist.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const fs::path& base_dir);
PipelineConfig load_pipeline_config(const fs::path& file);

nlohmann::json read_json(const fs::path& file);
std::string read_file(const fs::path& file);
/// Writes to a sibling temp file, then renames over `file`.
void write_file_atomic(const fs::path& file, std::string_view content);
void write_json(const fs::path& file, const nlohmann::json& j);

std::vector<Event> read_events(const fs::path& file);
IntegratedDataset read_integrated_file(const fs::path& file);

ingest::IngestResult run_ingest(const fs::path& input, Dataset dataset, ingest::Format format,
                                const ingest::AdapterConfig& adapter);
std::string rejects_csv(const std::vector<ingest::Rejection>& rejected);

gazetteer::OverrideTable load_overrides(const std::optional<fs::path>& file);

/// Offline enrichment against files, or online when `client` is given.
gazetteer::EnrichStats run_enrich(std::vector<Event>& events, const PipelineConfig& cfg,
                                  gazetteer::GeoNamesClient* client);
nlohmann::json to_json(const gazetteer::EnrichStats& stats);

/// Event triples of both datasets plus aggregate triples.
std::vector<rdf::Triple> integrated_triples(const std::vector<Event>& a, const std::vector<Event>& b,
                                            const integration::IntegrationResult& result);
nlohmann::json to_json(const integration::Counts& counts);

struct PipelineOptions {
  fs::path out_dir;
  bool online = false;
  bool run_linkcheck = false;
  std::optional<std::string> account;
};

void run_pipeline(const PipelineConfig& cfg, const PipelineOptions& opts);

}  // namespace l4r::cli
