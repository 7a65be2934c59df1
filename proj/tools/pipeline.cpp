#include "pipeline.hpp"

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "l4r/csv_writer.hpp"
#include "l4r/rdf.hpp"

namespace l4r::cli {

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

fs::path existing(const fs::path& base, const nlohmann::json& j, const char* key) {
  const auto path = resolve(base, j.at(key).get<std::string>());
  if (!fs::exists(path)) throw Error(std::string("config: ") + key + " not found: " + path.string());
  return path;
}

std::optional<fs::path> optional_existing(const fs::path& base, const nlohmann::json& j,
                                          const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return existing(base, j, key);
}

AnalyticsDefaults analytics_from_json(const nlohmann::json& j, const fs::path& base) {
  AnalyticsDefaults a;
  a.languages = j.value("languages", a.languages);
  a.months = j.value("months", a.months);
  if (j.contains("uc1_city_geoname_id")) a.uc1_city = j["uc1_city_geoname_id"].get<std::int64_t>();
  a.uc1_start = j.value("uc1_start", a.uc1_start);
  a.uc1_end = j.value("uc1_end", a.uc1_end);
  a.uc2_keyword = j.value("uc2_keyword", a.uc2_keyword);
  a.uc3_top_n = j.value("uc3_top_n", a.uc3_top_n);
  a.uc4_first_month = j.value("uc4_first_month", a.uc4_first_month);
  a.uc4_last_month = j.value("uc4_last_month", a.uc4_last_month);
  a.uc4_n = j.value("uc4_n", a.uc4_n);
  a.uc5_deaths = optional_existing(base, j, "uc5_deaths");
  if (j.contains("uc5_keyword")) a.uc5_keyword = j["uc5_keyword"].get<std::string>();
  a.uc5_first_month = j.value("uc5_first_month", a.uc5_first_month);
  a.uc5_last_month = j.value("uc5_last_month", a.uc5_last_month);
  a.shelters = optional_existing(base, j, "shelters");
  if (j.contains("uc6_city_geoname_id")) a.uc6_city = j["uc6_city_geoname_id"].get<std::int64_t>();
  a.shelter_radius_km = j.value("shelter_radius_km", a.shelter_radius_km);
  a.grid_cell_deg = j.value("grid_cell_deg", a.grid_cell_deg);
  for (const auto& l : a.languages) {
    if (!is_language_code(l)) throw Error("config: invalid language code '" + l + "'");
  }
  for (const auto& m : a.months) {
    if (!analytics::is_month_key(m)) throw Error("config: malformed month '" + m + "'");
  }
  if (!(a.shelter_radius_km > 0.0) || !(a.grid_cell_deg > 0.0)) {
    throw Error("config: shelter radius and grid cell size must be positive");
  }
  return a;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ", ") + p;
  return out;
}

}  // namespace

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  try {
    PipelineConfig cfg;
    if (const auto it = j.find("datasets"); it != j.end()) {
      for (const auto& [name, d] : it->items()) {
        DatasetSource src;
        src.input = optional_existing(base_dir, d, "input");
        src.format = ingest::parse_format_name(d.value("format", std::string("json")));
        src.adapter = ingest::adapter_config_from_json(d.at("mapping"));
        cfg.datasets.emplace(parse_dataset_name(name), std::move(src));
      }
    }
    if (const auto it = j.find("gazetteer"); it != j.end()) {
      cfg.gazetteer = GazetteerFiles{existing(base_dir, *it, "places"),
                                     existing(base_dir, *it, "alternate_names"),
                                     existing(base_dir, *it, "postal_codes")};
      cfg.overrides = optional_existing(base_dir, *it, "overrides");
    }
    if (j.contains("enrich")) cfg.enrich = gazetteer::enrich_config_from_json(j["enrich"]);
    if (j.contains("match")) cfg.match = integration::match_config_from_json(j["match"]);
    cfg.match.validate();
    if (j.contains("analytics")) cfg.analytics = analytics_from_json(j["analytics"], base_dir);
    if (j.contains("online")) cfg.online = gazetteer::client_config_from_json(j["online"]);
    if (j.contains("linkcheck")) cfg.linkcheck = linkcheck::check_config_from_json(j["linkcheck"]);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
}

PipelineConfig load_pipeline_config(const fs::path& file) {
  return pipeline_config_from_json(read_json(file), file.parent_path());
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& file) {
  const auto text = read_file(file);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SyntaxError(file.string() + ": " + e.what(), e.byte);
  }
}

void write_file_atomic(const fs::path& file, std::string_view content) {
  const auto dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
  fs::create_directories(dir);
  std::random_device rd;
  const auto tmp = dir / ("." + file.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw SinkError("cannot write " + file.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw SinkError("cannot replace " + file.string());
  }
}

void write_json(const fs::path& file, const nlohmann::json& j) {
  write_file_atomic(file, j.dump(2) + "\n");
}

std::vector<Event> read_events(const fs::path& file) {
  try {
    return events_from_json(read_json(file));
  } catch (const RecordError& e) {
    throw Error(file.string() + ": " + e.what());
  }
}

IntegratedDataset read_integrated_file(const fs::path& file) {
  std::vector<rdf::Triple> triples;
  try {
    triples = rdf::parse_ntriples(read_file(file));
  } catch (const SyntaxError& e) {
    throw Error(file.string() + ": line " + std::to_string(e.position()) + ": " + e.what());
  }
  return rdf::read_integrated(triples);
}

ingest::IngestResult run_ingest(const fs::path& input, Dataset dataset, ingest::Format format,
                                const ingest::AdapterConfig& adapter) {
  auto result = ingest::ingest(read_file(input), dataset, format, adapter);
  for (const auto& r : result.rejected) {
    std::cerr << "warning: " << input.string() << ": record " << r.index << " rejected: " << r.reason
              << "\n";
  }
  return result;
}

std::string rejects_csv(const std::vector<ingest::Rejection>& rejected) {
  CsvWriter csv;
  csv.row({"index", "reason"});
  for (const auto& r : rejected) csv.row({std::to_string(r.index), r.reason});
  return csv.str();
}

gazetteer::OverrideTable load_overrides(const std::optional<fs::path>& file) {
  if (!file) return {};
  return gazetteer::override_table_from_json(read_json(*file));
}

gazetteer::EnrichStats run_enrich(std::vector<Event>& events, const PipelineConfig& cfg,
                                  gazetteer::GeoNamesClient* client) {
  const auto overrides = load_overrides(cfg.overrides);
  gazetteer::GazetteerIndex index;
  if (client) {
    index = gazetteer::build_online_index(*client, events, overrides, cfg.enrich);
  } else if (cfg.gazetteer) {
    index = gazetteer::load_gazetteer(cfg.gazetteer->places, cfg.gazetteer->alternate_names,
                                      cfg.gazetteer->postal_codes);
  } else {
    throw UsageError("enrich: no gazetteer files configured and not running online");
  }
  return gazetteer::enrich_all(index, overrides, events, cfg.enrich);
}

nlohmann::json to_json(const gazetteer::EnrichStats& s) {
  return {{"events", s.events},
          {"missing_country", s.missing_country},
          {"missing_city", s.missing_city},
          {"missing_province", s.missing_province},
          {"missing_postal_code", s.missing_postal_code},
          {"city_from_coordinates", s.city_from_coordinates}};
}

std::vector<rdf::Triple> integrated_triples(const std::vector<Event>& a, const std::vector<Event>& b,
                                            const integration::IntegrationResult& result) {
  std::vector<rdf::Triple> triples;
  for (const auto* set : {&a, &b}) {
    for (const auto& ev : *set) {
      auto t = rdf::emit_event_triples(ev);
      triples.insert(triples.end(), std::make_move_iterator(t.begin()),
                     std::make_move_iterator(t.end()));
    }
  }
  for (const auto& agg : result.aggregates) {
    auto t = rdf::emit_aggregate_triples(agg);
    triples.insert(triples.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  return triples;
}

nlohmann::json to_json(const integration::Counts& c) {
  return {{"a", c.a},
          {"b", c.b},
          {"identical", c.identical},
          {"near_distinct", c.near_distinct},
          {"integrated", c.integrated}};
}

void run_pipeline(const PipelineConfig& cfg, const PipelineOptions& opts) {
  const auto& out = opts.out_dir;
  std::map<Dataset, std::vector<Event>> events;
  for (const auto ds : {Dataset::EOR, Dataset::CH}) {
    const auto it = cfg.datasets.find(ds);
    if (it == cfg.datasets.end() || !it->second.input) {
      events[ds] = {};
      continue;
    }
    const auto name = std::string(to_string(ds));
    auto result = run_ingest(*it->second.input, ds, it->second.format, it->second.adapter);
    write_json(out / ("events_" + name + ".json"), events_to_json(result.events));
    write_file_atomic(out / ("rejects_" + name + ".csv"), rejects_csv(result.rejected));
    events[ds] = std::move(result.events);
  }

  std::optional<gazetteer::GeoNamesClient> client;
  if (opts.online) {
    auto online = cfg.online;
    if (opts.account) online.account = *opts.account;
    client.emplace(online);
  }
  nlohmann::json stats = nlohmann::json::object();
  if (client || cfg.gazetteer) {
    for (auto& [ds, evs] : events) {
      const auto s = run_enrich(evs, cfg, client ? &*client : nullptr);
      stats[std::string(to_string(ds))] = to_json(s);
      write_json(out / ("enriched_" + std::string(to_string(ds)) + ".json"), events_to_json(evs));
    }
    write_json(out / "enrich_stats.json", stats);
  } else {
    std::cerr << "warning: no gazetteer configured, skipping enrichment\n";
  }

  const auto& A = events[Dataset::EOR];
  const auto& B = events[Dataset::CH];
  const auto result = integration::integrate(A, B, cfg.match);
  const auto triples = integrated_triples(A, B, result);
  write_file_atomic(out / "integrated.nt", rdf::serialize(triples, rdf::Format::NTriples));
  write_file_atomic(out / "integrated.ttl", rdf::serialize(triples, rdf::Format::Turtle));
  write_file_atomic(out / "pairs.csv", integration::pairs_to_csv(result.pairs));
  write_json(out / "integration_summary.json", to_json(result.counts));

  // Reports read the integrated graph back, as a separate `report` run would.
  const auto ds = read_integrated_file(out / "integrated.nt");
  const auto& a = cfg.analytics;
  const auto uc1 = analytics::uc1_event_points(ds, a.uc1_city, parse_civil_date(a.uc1_start),
                                               parse_civil_date(a.uc1_end));
  write_file_atomic(out / "uc1.nt", rdf::serialize(analytics::uc1_triples(uc1), rdf::Format::NTriples));
  write_json(out / "uc1.geojson", analytics::uc1_geojson(uc1));
  write_file_atomic(out / "uc2.csv", analytics::month_buckets_csv(analytics::uc2_monthly_keyword_series(
                                         ds, a.uc2_keyword, a.months)));
  write_file_atomic(out / "uc3.csv",
                    analytics::city_label_csv(a.languages, analytics::uc3_multilingual_city_report(
                                                               ds, a.languages, a.uc3_top_n)));
  write_file_atomic(out / "uc4.csv", analytics::monthly_regions_csv(analytics::uc4_monthly(
                                         ds, a.uc4_first_month, a.uc4_last_month, a.uc4_n)));
  if (a.uc5_deaths) {
    const auto months = analytics::month_range(a.uc5_first_month, a.uc5_last_month);
    const auto attacks = a.uc5_keyword
                             ? analytics::uc2_monthly_keyword_series(ds, *a.uc5_keyword, months)
                             : analytics::monthly_event_counts(ds, months);
    std::vector<std::string> warnings;
    const auto rows = analytics::uc5_ratio_series(
        attacks, analytics::parse_deaths_csv(read_file(*a.uc5_deaths)), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: uc5: " << w << "\n";
    write_file_atomic(out / "uc5.csv", analytics::ratio_csv(rows));
  }
  if (a.shelters) {
    const auto gap = analytics::uc6_shelter_gap(ds, analytics::parse_shelters_csv(read_file(*a.shelters)),
                                                a.shelter_radius_km, a.grid_cell_deg, a.uc6_city);
    write_json(out / "uc6.geojson", analytics::uc6_geojson(gap));
    write_file_atomic(out / "uc6_grid.csv", analytics::grid_csv(gap));
  }

  if (opts.run_linkcheck) {
    std::vector<Event> all(A.begin(), A.end());
    all.insert(all.end(), B.begin(), B.end());
    const auto report = linkcheck::link_report(all, cfg.linkcheck);
    write_file_atomic(out / "links.csv", linkcheck::rows_csv(report.rows));
    write_json(out / "links_summary.json", linkcheck::summary_json(report));
  }

  std::cout << "events: eor " << result.counts.a << ", ch " << result.counts.b
            << "; identical pairs " << result.counts.identical << "; near-distinct pairs "
            << result.counts.near_distinct << "; integrated " << result.counts.integrated << "\n";
  std::vector<std::string> written;
  for (const auto& entry : fs::directory_iterator(out)) written.push_back(entry.path().filename().string());
  std::sort(written.begin(), written.end());
  std::cerr << "wrote " << join(written) << "\n";
}

}  // namespace l4r::cli
