#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "l4r/ingest.hpp"
#include "mock_servers.hpp"

namespace {

using l4r::test::fixture;
using l4r::test::read_text;
using l4r::test::TempDir;
namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') q += "'\\''";
    else q += c;
  }
  return q + "'";
}

Run cli(const std::vector<std::string>& args) {
  static int counter = 0;
  const auto base = fs::temp_directory_path() / ("l4r_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::string cmd = quote(L4R_CLI);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " >" + quote(base.string() + ".out") + " 2>" + quote(base.string() + ".err");
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text(base.string() + ".out");
  r.err = read_text(base.string() + ".err");
  fs::remove(base.string() + ".out");
  fs::remove(base.string() + ".err");
  return r;
}

std::size_t count_rows(const std::string& csv, const std::string& needle) {
  std::size_t n = 0;
  for (const auto& row : l4r::ingest::parse_csv(csv)) {
    for (const auto& f : row) n += f == needle;
  }
  return n;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"ingest", "--dataset", "eor"}).code, 2);
  const auto r = cli({"--offline", "linkcheck", "--input", fixture("ingest/three.json").string(), "--out-csv", "/dev/null"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, HelpSucceeds) {
  const auto r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("pipeline"), std::string::npos);
}

TEST(Cli, PipelineEndToEndAndDeterministic) {
  const TempDir dir;
  const auto first = dir / "one";
  const auto second = dir / "two";
  ASSERT_EQ(cli({"--offline", "pipeline", "--config", fixture("pipeline.json").string(), "--out-dir", first.string()}).code, 0);
  ASSERT_EQ(cli({"--offline", "pipeline", "--config", fixture("pipeline.json").string(), "--out-dir", second.string()}).code, 0);

  EXPECT_EQ(count_rows(read_text(first / "pairs.csv"), "Identical"), 5u);
  EXPECT_EQ(count_rows(read_text(first / "pairs.csv"), "NearDistinct"), 2u);
  const auto summary = nlohmann::json::parse(read_text(first / "integration_summary.json"));
  EXPECT_EQ(summary["integrated"], 65);
  EXPECT_EQ(summary["identical"], 5);

  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(first)) {
    ++files;
    const auto other = second / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << entry.path();
    EXPECT_EQ(read_text(entry.path()), read_text(other)) << entry.path().filename();
  }
  EXPECT_GE(files, 15u);
  for (const auto* name : {"integrated.nt", "integrated.ttl", "uc1.nt", "uc1.geojson", "uc2.csv", "uc3.csv",
                           "uc4.csv", "uc5.csv", "uc6.geojson", "uc6_grid.csv", "enrich_stats.json"}) {
    EXPECT_TRUE(fs::exists(first / name)) << name;
  }
  EXPECT_FALSE(fs::exists(first / "links.csv"));
}

TEST(Cli, StageByStage) {
  const TempDir dir;
  const auto cfg = fixture("pipeline.json").string();
  ASSERT_EQ(cli({"ingest", "--dataset", "eor", "--format", "json", "--input", fixture("integration/eor.json").string(),
                 "--config", cfg, "--out", (dir / "a.json").string(), "--rejects", (dir / "ra.csv").string()})
                .code,
            0);
  ASSERT_EQ(cli({"ingest", "--dataset", "ch", "--format", "csv", "--input", fixture("integration/ch.csv").string(),
                 "--config", cfg, "--out", (dir / "b.json").string()})
                .code,
            0);
  EXPECT_EQ(nlohmann::json::parse(read_text(dir / "a.json")).size(), 50u);
  for (const auto* side : {"a", "b"}) {
    ASSERT_EQ(cli({"enrich", "--config", cfg, "--input", (dir / (std::string(side) + ".json")).string(), "--out",
                   (dir / (std::string(side) + "e.json")).string(), "--stats", (dir / "stats.json").string()})
                  .code,
              0);
  }
  ASSERT_EQ(cli({"integrate", "--a", (dir / "ae.json").string(), "--b", (dir / "be.json").string(), "--out",
                 (dir / "g.nt").string(), "--pairs", (dir / "pairs.csv").string(), "--summary", (dir / "s.json").string()})
                .code,
            0);
  EXPECT_EQ(nlohmann::json::parse(read_text(dir / "s.json"))["integrated"], 65);
  EXPECT_EQ(count_rows(read_text(dir / "pairs.csv"), "Identical"), 5u);

  ASSERT_EQ(cli({"convert", "--input", (dir / "ae.json").string(), "--out", (dir / "a.ttl").string(), "--format", "ttl"}).code, 0);
  EXPECT_NE(read_text(dir / "a.ttl").find("@prefix"), std::string::npos);

  const auto g = (dir / "g.nt").string();
  ASSERT_EQ(cli({"report", "uc2", "--input", g, "--keyword", "school", "--out", (dir / "uc2.csv").string()}).code, 0);
  const auto uc2 = l4r::ingest::parse_csv(read_text(dir / "uc2.csv"));
  EXPECT_EQ(uc2.size(), 16u);
  ASSERT_EQ(cli({"report", "uc4", "--input", g, "--start", "2022-10-01", "--end", "2023-03-01", "--n", "2", "--out",
                 (dir / "uc4.csv").string()})
                .code,
            0);
  EXPECT_EQ(read_text(dir / "uc4.csv").substr(0, 19), "region,occurrences\n");
  ASSERT_EQ(cli({"report", "uc6", "--input", g, "--shelters", fixture("analytics/shelters.csv").string(), "--out-grid",
                 (dir / "grid.csv").string(), "--out-geojson", (dir / "gap.geojson").string()})
                .code,
            0);
  EXPECT_EQ(nlohmann::json::parse(read_text(dir / "gap.geojson"))["type"], "FeatureCollection");
  EXPECT_EQ(cli({"report", "uc4", "--input", g, "--start", "2023-01-01", "--end", "2023-01-01", "--out",
                 (dir / "x.csv").string()})
                .code,
            2);
}

TEST(Cli, DataErrorsExitOne) {
  const TempDir dir;
  std::ofstream(dir / "bad.nt") << "<a> <b> .\n";
  const auto r = cli({"report", "uc2", "--input", (dir / "bad.nt").string(), "--out", (dir / "o.csv").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "o.csv"));
}

TEST(Cli, LinkcheckAgainstMock) {
  l4r::test::MockLinkServer server;
  const TempDir dir;
  const auto cfg = fixture("pipeline.json").string();
  ASSERT_EQ(cli({"ingest", "--dataset", "ch", "--format", "csv", "--input", fixture("integration/ch.csv").string(),
                 "--config", cfg, "--out", (dir / "b.json").string()})
                .code,
            0);
  ASSERT_EQ(cli({"linkcheck", "--input", (dir / "b.json").string(), "--out-csv", (dir / "l.csv").string(),
                 "--out-summary", (dir / "l.json").string(), "--base-url", server.base_url(), "--timeout", "2"})
                .code,
            0);
  const auto summary = nlohmann::json::parse(read_text(dir / "l.json"));
  EXPECT_EQ(summary["ch"]["events"], 20);
  EXPECT_EQ(read_text(dir / "l.csv").substr(0, 30), "url,status,http_code,event_id\n");
}

}  // namespace
