#include "cli/config.hpp"
#include "cli/plot.hpp"
#include "cli/report.hpp"
#include "cli/runners.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace psichain;
using namespace psichain::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("psichain_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kNets = R"({"kind": "nets-selftest", "mode": "approx", "seed": 5,
  "grid": {"N": [16, 32], "m": [2, 4]}, "params": {"instances": 50}})";

const char* kConcentrate = R"({"kind": "concentrate", "mode": "scaling", "seed": 3, "trials": 3,
  "ensembles": [{"kind": "gaussian"}, {"kind": "l1ball"}],
  "classes": [{"kind": "sphere"}, {"kind": "l1_vertices"}],
  "grid": {"n": [4], "N": [64, 128]},
  "params": {"width_trials": 200, "q_samples": 2000, "q_directions": 4}})";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("missing seed is named") {
    try {
      parse_config(R"({"kind": "nets-selftest", "mode": "approx"})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("seed") != std::string::npos);
    }
  }

  TEST_CASE("malformed configs") {
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"kind": "bogus", "mode": "x", "seed": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"kind": "diam", "mode": "scaling", "seed": -1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"kind": "diam", "mode": "scaling", "seed": 1, "grid": {"n": []}})"),
                    ConfigError);
    CHECK_THROWS_AS(run_experiment(parse_config(R"({"kind": "diam", "mode": "nope", "seed": 1})")), ConfigError);
  }

  TEST_CASE("seed override changes the hash") {
    auto cfg = parse_config(kNets);
    const auto h = config_hash(cfg.raw);
    override_seed(cfg, 6);
    CHECK(cfg.seed == 6);
    CHECK(config_hash(cfg.raw) != h);
  }

  TEST_CASE("nets selftest passes") {
    const auto r = run_experiment(parse_config(kNets));
    CHECK(r.status == "complete");
    REQUIRE(!r.properties.empty());
    for (const auto& p : r.properties) CHECK_MESSAGE(p.pass, p.name << ": " << p.detail);
    CHECK(exit_status(r) == 0);
  }

  TEST_CASE("report round trip and recomputable hash") {
    const auto cfg = parse_config(kNets);
    const auto r = run_experiment(cfg);
    const auto dir = scratch("roundtrip");
    write_report(r, dir, "nets");
    const auto loaded = load_report(dir / "nets_summary.json");
    CHECK(loaded.summary["schema"] == kReportSchema);
    CHECK(loaded.summary["config_hash"].get<std::string>() == hex64(config_hash(loaded.summary["config"])));
    REQUIRE(loaded.tables.size() == r.tables.size());
    for (std::size_t i = 0; i < r.tables.size(); ++i) CHECK(to_csv(loaded.tables[i]) == to_csv(r.tables[i]));
  }

  TEST_CASE("concentration report carries fits and plots per ensemble and class") {
    const auto r = run_experiment(parse_config(kConcentrate));
    const Table* fits = r.find("fits");
    REQUIRE(fits != nullptr);
    CHECK(fits->rows.size() >= 4);
    const auto dir = scratch("concentrate");
    write_report(r, dir, "conc");
    const auto out1 = scratch("plot1"), out2 = scratch("plot2");
    const auto a = plot_report(dir / "conc_summary.json", out1);
    const auto b = plot_report(dir / "conc_summary.json", out2);
    CHECK(a.size() == 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].filename() == b[i].filename());
      CHECK(slurp(a[i]) == slurp(b[i]));
      CHECK(slurp(a[i]).rfind("<svg", 0) == 0);
    }
  }

  TEST_CASE("empty figure renders axes only") {
    Figure f;
    f.title = "empty";
    const auto svg = render_svg(f);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polyline") == std::string::npos);
    CHECK(svg == render_svg(f));
  }

  TEST_CASE("schema mismatch is rejected") {
    const auto dir = scratch("schema");
    std::ofstream(dir / "x_summary.json") << R"({"schema": "other/9", "tables": []})";
    CHECK_THROWS(load_report(dir / "x_summary.json"));
    std::ofstream(dir / "y_summary.json") << "not json";
    CHECK_THROWS(load_report(dir / "y_summary.json"));
  }

  TEST_CASE("missing column is rejected by the plotter") {
    LoadedReport lr;
    lr.summary = Json{{"schema", kReportSchema}, {"kind", "concentrate"}, {"mode", "scaling"}};
    Table t;
    t.name = "concentration";
    t.columns = {"ensemble", "class", "N"};
    t.rows = {{"gaussian", "sphere", "64"}};
    lr.tables.push_back(t);
    CHECK_THROWS(figures_for(lr));
  }

  TEST_CASE("csv quoting round trip") {
    Table t;
    t.name = "q";
    t.columns = {"a", "b"};
    t.add({"x,y", "say \"hi\""});
    const auto back = parse_csv("q", to_csv(t));
    REQUIRE(back.rows.size() == 1);
    CHECK(back.rows[0][0] == "x,y");
    CHECK(back.rows[0][1] == "say \"hi\"");
    CHECK_THROWS(t.add({"only one"}));
  }

  TEST_CASE("tiny budget yields a partial report") {
    auto cfg = parse_config(kConcentrate);
    RunOptions opt;
    opt.budget_secs = 1e-9;
    const auto r = run_experiment(cfg, opt);
    CHECK(r.status != "complete");
    CHECK(exit_status(r) != 0);
  }
}
