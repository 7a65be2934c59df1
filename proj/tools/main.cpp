// l4r: convert, enrich, integrate and report on damage-event datasets.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "l4r/text.hpp"
#include "pipeline.hpp"

namespace l4r::cli {
namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!l4r::trim(cur).empty()) out.emplace_back(l4r::trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!l4r::trim(cur).empty()) out.emplace_back(l4r::trim(cur));
  return out;
}

rdf::Format rdf_format(const std::string& s) {
  if (s == "nt") return rdf::Format::NTriples;
  if (s == "ttl") return rdf::Format::Turtle;
  throw UsageError("unknown RDF format '" + s + "' (expected nt or ttl)");
}

PipelineConfig config_or_default(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_pipeline_config(path);
}

std::optional<std::string> account_from_env() {
  if (const char* v = std::getenv(kAccountEnv); v && *v) return std::string(v);
  return std::nullopt;
}

struct Args {
  bool offline = false;
  std::string config;

  // ingest
  std::string dataset, format = "json", input, out, rejects;
  // enrich
  bool online = false;
  std::string account, geonames_url, places, alt_names, postal, overrides, stats;
  // convert / integrate
  std::string rdf_fmt = "nt", a, b, pairs, summary;
  // report
  std::string start, end, keyword, months, from_month, to_month, langs, deaths, shelters;
  std::string out_nt, out_geojson, out_grid;
  std::int64_t city = 0;
  std::size_t top = 0, n = 0;
  double radius = 0.0, cell = 0.0;
  // linkcheck
  std::vector<std::string> inputs;
  std::string out_csv, out_summary, base_url;
  std::size_t concurrency = 0;
  double timeout = 0.0;
  // pipeline
  std::string out_dir;
  bool with_linkcheck = false;
};

CivilDate flag_date(const char* flag, const std::string& value) {
  try {
    return parse_civil_date(value);
  } catch (const Error& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

std::vector<std::string> month_flags(const std::string& first, const std::string& last) {
  try {
    return analytics::month_range(first, last);
  } catch (const Error& e) {
    throw UsageError(std::string("--from-month/--to-month: ") + e.what());
  }
}

std::vector<std::string> months_from(const Args& args, const std::vector<std::string>& fallback) {
  if (!args.months.empty()) {
    auto months = split_list(args.months);
    for (const auto& m : months) {
      if (!analytics::is_month_key(m)) throw UsageError("--months: malformed month '" + m + "'");
    }
    return months;
  }
  if (!args.from_month.empty() || !args.to_month.empty()) {
    if (args.from_month.empty() || args.to_month.empty()) {
      throw UsageError("--from-month and --to-month go together");
    }
    return month_flags(args.from_month, args.to_month);
  }
  return fallback;
}

// Flag problems surface as usage errors before any input is read.
void check_report_flags(const std::string& uc, const Args& args) {
  if (uc == "uc1" && !args.start.empty() && !args.end.empty()) {
    if (flag_date("--end", args.end) < flag_date("--start", args.start)) {
      throw UsageError("--start must not be after --end");
    }
  } else if (uc == "uc4" && !args.start.empty() && !args.end.empty()) {
    if (!(flag_date("--start", args.start) < flag_date("--end", args.end))) {
      throw UsageError("--start must precede --end (end is exclusive)");
    }
  }
  if (!args.from_month.empty() && !args.to_month.empty()) month_flags(args.from_month, args.to_month);
  if (!args.start.empty()) flag_date("--start", args.start);
  if (!args.end.empty()) flag_date("--end", args.end);
}

int cmd_ingest(const Args& args) {
  const auto dataset = parse_dataset_name(args.dataset);
  auto format = ingest::parse_format_name(args.format);
  const auto doc = read_json(args.config);
  ingest::AdapterConfig adapter;
  if (doc.contains("datasets")) {
    const auto cfg = pipeline_config_from_json(doc, fs::path(args.config).parent_path());
    const auto it = cfg.datasets.find(dataset);
    if (it == cfg.datasets.end()) throw UsageError("config has no mapping for " + args.dataset);
    adapter = it->second.adapter;
  } else {
    adapter = ingest::adapter_config_from_json(doc);
  }
  const auto result = run_ingest(args.input, dataset, format, adapter);
  write_json(args.out, events_to_json(result.events));
  if (!args.rejects.empty()) write_file_atomic(args.rejects, rejects_csv(result.rejected));
  std::cout << result.events.size() << " events, " << result.rejected.size() << " rejected\n";
  return 0;
}

int cmd_enrich(const Args& args) {
  auto cfg = config_or_default(args.config);
  if (!args.places.empty() || !args.alt_names.empty() || !args.postal.empty()) {
    if (args.places.empty() || args.alt_names.empty() || args.postal.empty()) {
      throw UsageError("--places, --alt-names and --postal go together");
    }
    cfg.gazetteer = GazetteerFiles{args.places, args.alt_names, args.postal};
  }
  if (!args.overrides.empty()) cfg.overrides = fs::path(args.overrides);
  if (args.online && args.offline) throw UsageError("--online conflicts with --offline");

  std::optional<gazetteer::GeoNamesClient> client;
  if (args.online) {
    auto online = cfg.online;
    if (!args.geonames_url.empty()) online.base_url = args.geonames_url;
    if (!args.account.empty()) {
      online.account = args.account;
    } else if (auto env = account_from_env()) {
      online.account = *env;
    }
    if (online.account.empty()) {
      throw UsageError(std::string("online enrichment needs --account or ") + kAccountEnv);
    }
    client.emplace(online);
  }

  auto events = read_events(args.input);
  const auto stats = run_enrich(events, cfg, client ? &*client : nullptr);
  write_json(args.out, events_to_json(events));
  if (!args.stats.empty()) write_json(args.stats, to_json(stats));
  std::cout << stats.events << " events; unresolved city " << stats.missing_city << ", province "
            << stats.missing_province << ", country " << stats.missing_country << ", postal code "
            << stats.missing_postal_code << "\n";
  return 0;
}

int cmd_convert(const Args& args) {
  const auto events = read_events(args.input);
  std::vector<rdf::Triple> triples;
  for (const auto& ev : events) {
    auto t = rdf::emit_event_triples(ev);
    triples.insert(triples.end(), t.begin(), t.end());
  }
  write_file_atomic(args.out, rdf::serialize(triples, rdf_format(args.rdf_fmt)));
  return 0;
}

int cmd_integrate(const Args& args) {
  const auto cfg = config_or_default(args.config);
  const auto A = read_events(args.a);
  const auto B = read_events(args.b);
  for (const auto& ev : A) {
    if (ev.dataset != Dataset::EOR) throw Error(args.a + ": event " + ev.id + " is not an eor event");
  }
  for (const auto& ev : B) {
    if (ev.dataset != Dataset::CH) throw Error(args.b + ": event " + ev.id + " is not a ch event");
  }
  const auto result = integration::integrate(A, B, cfg.match);
  write_file_atomic(args.out, rdf::serialize(integrated_triples(A, B, result), rdf_format(args.rdf_fmt)));
  if (!args.pairs.empty()) write_file_atomic(args.pairs, integration::pairs_to_csv(result.pairs));
  if (!args.summary.empty()) write_json(args.summary, to_json(result.counts));
  std::cout << to_json(result.counts).dump() << "\n";
  return 0;
}

int cmd_report(const std::string& uc, const Args& args) {
  check_report_flags(uc, args);
  const auto cfg = config_or_default(args.config);
  const auto& d = cfg.analytics;
  const auto ds = read_integrated_file(args.input);

  if (uc == "uc1") {
    const auto city = args.city ? std::optional<std::int64_t>(args.city) : d.uc1_city;
    const auto points = analytics::uc1_event_points(
        ds, city, parse_civil_date(args.start.empty() ? d.uc1_start : args.start),
        parse_civil_date(args.end.empty() ? d.uc1_end : args.end));
    if (args.out_nt.empty() && args.out_geojson.empty()) throw UsageError("uc1 needs --out-nt or --out-geojson");
    if (!args.out_nt.empty()) {
      write_file_atomic(args.out_nt, rdf::serialize(analytics::uc1_triples(points), rdf::Format::NTriples));
    }
    if (!args.out_geojson.empty()) write_json(args.out_geojson, analytics::uc1_geojson(points));
    std::cout << points.size() << " points\n";
  } else if (uc == "uc2") {
    const auto rows = analytics::uc2_monthly_keyword_series(
        ds, args.keyword.empty() ? d.uc2_keyword : args.keyword, months_from(args, d.months));
    write_file_atomic(args.out, analytics::month_buckets_csv(rows));
  } else if (uc == "uc3") {
    const auto langs = args.langs.empty() ? d.languages : split_list(args.langs);
    const auto rows =
        analytics::uc3_multilingual_city_report(ds, langs, args.top ? args.top : d.uc3_top_n);
    write_file_atomic(args.out, analytics::city_label_csv(langs, rows));
  } else if (uc == "uc4") {
    const auto n = args.n ? args.n : d.uc4_n;
    if (!args.start.empty() || !args.end.empty()) {
      if (args.start.empty() || args.end.empty()) throw UsageError("--start and --end go together");
      const auto rows =
          analytics::uc4_top_regions(ds, parse_civil_date(args.start), parse_civil_date(args.end), n);
      write_file_atomic(args.out, analytics::region_rank_csv(rows));
    } else {
      const auto first = args.from_month.empty() ? d.uc4_first_month : args.from_month;
      const auto last = args.to_month.empty() ? d.uc4_last_month : args.to_month;
      write_file_atomic(args.out, analytics::monthly_regions_csv(analytics::uc4_monthly(ds, first, last, n)));
    }
  } else if (uc == "uc5") {
    const auto deaths_file = args.deaths.empty() ? d.uc5_deaths : std::optional<fs::path>(args.deaths);
    if (!deaths_file) throw UsageError("uc5 needs --deaths");
    const auto months =
        months_from(args, analytics::month_range(d.uc5_first_month, d.uc5_last_month));
    const auto keyword = args.keyword.empty() ? d.uc5_keyword : std::optional<std::string>(args.keyword);
    const auto attacks = keyword ? analytics::uc2_monthly_keyword_series(ds, *keyword, months)
                                 : analytics::monthly_event_counts(ds, months);
    std::vector<std::string> warnings;
    const auto rows =
        analytics::uc5_ratio_series(attacks, analytics::parse_deaths_csv(read_file(*deaths_file)), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    write_file_atomic(args.out, analytics::ratio_csv(rows));
  } else if (uc == "uc6") {
    const auto shelters_file =
        args.shelters.empty() ? d.shelters : std::optional<fs::path>(args.shelters);
    if (!shelters_file) throw UsageError("uc6 needs --shelters");
    if (args.out_geojson.empty() && args.out_grid.empty()) throw UsageError("uc6 needs --out-geojson or --out-grid");
    const auto city = args.city ? std::optional<std::int64_t>(args.city) : d.uc6_city;
    const auto gap = analytics::uc6_shelter_gap(
        ds, analytics::parse_shelters_csv(read_file(*shelters_file)),
        args.radius > 0 ? args.radius : d.shelter_radius_km, args.cell > 0 ? args.cell : d.grid_cell_deg, city);
    if (!args.out_geojson.empty()) write_json(args.out_geojson, analytics::uc6_geojson(gap));
    if (!args.out_grid.empty()) write_file_atomic(args.out_grid, analytics::grid_csv(gap));
    std::cout << gap.uncovered.size() << " uncovered events\n";
  }
  return 0;
}

int cmd_linkcheck(const Args& args) {
  if (args.offline) throw UsageError("linkcheck needs the network and refuses to run with --offline");
  auto cfg = config_or_default(args.config).linkcheck;
  if (args.concurrency) cfg.concurrency = args.concurrency;
  if (args.timeout > 0) cfg.timeout = std::chrono::milliseconds(static_cast<long long>(args.timeout * 1000));
  if (!args.base_url.empty()) cfg.base_url = args.base_url;
  std::vector<Event> events;
  for (const auto& in : args.inputs) {
    auto evs = read_events(in);
    events.insert(events.end(), evs.begin(), evs.end());
  }
  const auto report = linkcheck::link_report(events, cfg);
  write_file_atomic(args.out_csv, linkcheck::rows_csv(report.rows));
  const auto summary = linkcheck::summary_json(report);
  if (!args.out_summary.empty()) write_json(args.out_summary, summary);
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_pipeline(const Args& args) {
  if (args.online && args.offline) throw UsageError("--online conflicts with --offline");
  if (args.with_linkcheck && args.offline) {
    throw UsageError("--linkcheck needs the network and cannot be combined with --offline");
  }
  const auto cfg = load_pipeline_config(args.config);
  PipelineOptions opts;
  opts.out_dir = args.out_dir;
  opts.online = args.online;
  opts.run_linkcheck = args.with_linkcheck;
  if (!args.account.empty()) {
    opts.account = args.account;
  } else if (auto env = account_from_env()) {
    opts.account = env;
  }
  run_pipeline(cfg, opts);
  return 0;
}

}  // namespace
}  // namespace l4r::cli

int main(int argc, char** argv) {
  using namespace l4r::cli;
  Args args;
  CLI::App app{"Converts, enriches and integrates damage-event datasets as linked data."};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_flag("--offline", args.offline, "Forbid all network use");

  auto* ingest = app.add_subcommand("ingest", "Parse a source file into normalized events");
  ingest->add_option("--dataset", args.dataset, "eor or ch")->required();
  ingest->add_option("--format", args.format, "json or csv");
  ingest->add_option("--input", args.input, "Source file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--config", args.config, "Adapter or pipeline config")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", args.out, "Normalized event JSON")->required();
  ingest->add_option("--rejects", args.rejects, "CSV of rejected records");

  auto* enrich = app.add_subcommand("enrich", "Resolve places, postal codes and labels");
  enrich->add_option("--input", args.input)->required()->check(CLI::ExistingFile);
  enrich->add_option("--out", args.out)->required();
  enrich->add_option("--config", args.config, "Pipeline config")->check(CLI::ExistingFile);
  enrich->add_option("--places", args.places)->check(CLI::ExistingFile);
  enrich->add_option("--alt-names", args.alt_names)->check(CLI::ExistingFile);
  enrich->add_option("--postal", args.postal)->check(CLI::ExistingFile);
  enrich->add_option("--overrides", args.overrides)->check(CLI::ExistingFile);
  enrich->add_option("--stats", args.stats, "JSON with unresolved-field counts");
  enrich->add_flag("--online", args.online, "Use the GeoNames web service");
  enrich->add_option("--account", args.account, std::string("GeoNames account (default $") + kAccountEnv + ")");
  enrich->add_option("--geonames-url", args.geonames_url);

  auto* convert = app.add_subcommand("convert", "Write normalized events as RDF");
  convert->add_option("--input", args.input)->required()->check(CLI::ExistingFile);
  convert->add_option("--out", args.out)->required();
  convert->add_option("--format", args.rdf_fmt, "nt or ttl");

  auto* integrate = app.add_subcommand("integrate", "Match events across datasets");
  integrate->add_option("--a", args.a, "EoR events")->required()->check(CLI::ExistingFile);
  integrate->add_option("--b", args.b, "CH events")->required()->check(CLI::ExistingFile);
  integrate->add_option("--out", args.out, "Integrated graph")->required();
  integrate->add_option("--format", args.rdf_fmt, "nt or ttl");
  integrate->add_option("--pairs", args.pairs, "Pair report CSV");
  integrate->add_option("--summary", args.summary, "Counts as JSON");
  integrate->add_option("--config", args.config)->check(CLI::ExistingFile);

  auto* report = app.add_subcommand("report", "Run one use-case report over an integrated .nt");
  report->require_subcommand(1);
  std::string which;
  for (const char* uc : {"uc1", "uc2", "uc3", "uc4", "uc5", "uc6"}) {
    auto* sub = report->add_subcommand(uc);
    sub->add_option("--input", args.input, "Integrated N-Triples")->required()->check(CLI::ExistingFile);
    sub->add_option("--config", args.config)->check(CLI::ExistingFile);
    sub->callback([&which, uc] { which = uc; });
    const std::string name = uc;
    if (name == "uc1") {
      sub->add_option("--city", args.city, "City geoname id");
      sub->add_option("--start", args.start);
      sub->add_option("--end", args.end);
      sub->add_option("--out-nt", args.out_nt);
      sub->add_option("--out-geojson", args.out_geojson);
    } else if (name == "uc6") {
      sub->add_option("--shelters", args.shelters, "CSV name,lat,lon")->check(CLI::ExistingFile);
      sub->add_option("--radius", args.radius, "km");
      sub->add_option("--cell", args.cell, "Grid cell size in degrees");
      sub->add_option("--city", args.city, "City geoname id");
      sub->add_option("--out-geojson", args.out_geojson);
      sub->add_option("--out-grid", args.out_grid);
    } else {
      sub->add_option("--out", args.out)->required();
      if (name == "uc2" || name == "uc5") {
        sub->add_option("--keyword", args.keyword);
        sub->add_option("--months", args.months, "Comma-separated YYYY-MM list");
        sub->add_option("--from-month", args.from_month);
        sub->add_option("--to-month", args.to_month);
      }
      if (name == "uc3") {
        sub->add_option("--langs", args.langs, "Comma-separated language codes");
        sub->add_option("--top", args.top);
      }
      if (name == "uc4") {
        sub->add_option("--start", args.start, "Inclusive");
        sub->add_option("--end", args.end, "Exclusive");
        sub->add_option("--from-month", args.from_month);
        sub->add_option("--to-month", args.to_month);
        sub->add_option("--n", args.n);
      }
      if (name == "uc5") sub->add_option("--deaths", args.deaths, "CSV month,deaths")->check(CLI::ExistingFile);
    }
  }

  auto* links = app.add_subcommand("linkcheck", "Check source URLs");
  links->add_option("--input", args.inputs, "Event JSON files")->required()->check(CLI::ExistingFile);
  links->add_option("--out-csv", args.out_csv)->required();
  links->add_option("--out-summary", args.out_summary);
  links->add_option("--concurrency", args.concurrency);
  links->add_option("--timeout", args.timeout, "Seconds");
  links->add_option("--base-url", args.base_url, "Send all requests to this origin");
  links->add_option("--config", args.config)->check(CLI::ExistingFile);

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage from one config");
  pipeline->add_option("--config", args.config)->required()->check(CLI::ExistingFile);
  pipeline->add_option("--out-dir", args.out_dir)->required();
  pipeline->add_flag("--online", args.online);
  pipeline->add_option("--account", args.account);
  pipeline->add_flag("--linkcheck", args.with_linkcheck, "Also check source URLs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest) return cmd_ingest(args);
    if (*enrich) return cmd_enrich(args);
    if (*convert) return cmd_convert(args);
    if (*integrate) return cmd_integrate(args);
    if (*report) return cmd_report(which, args);
    if (*links) return cmd_linkcheck(args);
    if (*pipeline) return cmd_pipeline(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
