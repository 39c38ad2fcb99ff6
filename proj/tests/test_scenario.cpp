#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "eventreg/plot.hpp"
#include "eventreg/scenario.hpp"

using namespace eventreg;
using namespace eventreg::scenario;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("eventreg_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

RunOptions no_files() { return RunOptions{false, {}}; }

}  // namespace

TEST_CASE("catalog") {
  const auto& cat = catalog();
  CHECK(cat.size() == 8);
  std::set<std::string> names;
  for (const auto& c : cat) {
    names.insert(c.name);
    CHECK_FALSE(c.description.empty());
  }
  CHECK(names.size() == 8);
  for (const char* n : {"linear-baseline", "rejection", "rejection-mismatch",
                        "no-contraction-demo", "open-system", "single-neuron-fail",
                        "antiphase-demo", "pass-all-demo"}) {
    CHECK(names.count(n) == 1);
  }
  CHECK_THROWS_AS(lookup("nope"), ScenarioError);

  const auto mismatch = lookup("rejection-mismatch");
  CHECK(mismatch.exo.k == 1.0);
  CHECK(mismatch.ctrl.k == 3.0);
  CHECK(mismatch.ctrl.tau == doctest::Approx(1.0 / 16));
  const auto open = lookup("open-system");
  CHECK(open.ctrl.k == 4.0);
  CHECK(open.ref.k == 3.0);
  CHECK(open.ref.tau == doctest::Approx(1.0 / 13));
  CHECK(open.v(0.0) == 1.5);
  CHECK(open.v(10.0) == 0.0);
  CHECK(open.v(40.5) == 1.5);
}

TEST_CASE("parameter overrides") {
  ScenarioConfig cfg = lookup("rejection");

  SUBCASE("dotted keys and aliases") {
    cfg.set("ctrl.k", 3.5);
    CHECK(cfg.ctrl.k == 3.5);
    cfg.set("k_eta", "4");
    CHECK(cfg.get("ctrl.k") == 4.0);
    cfg.set("tau_w", "1/13");
    CHECK(cfg.exo.tau == doctest::Approx(1.0 / 13));
    CHECK(canonical_key("k_w") == "exo.k");
    CHECK(canonical_key("dt") == "sim.dt");
  }

  SUBCASE("every listed key round-trips") {
    for (const auto& key : cfg.keys()) {
      CAPTURE(key);
      ScenarioConfig c = cfg;
      c.set(key, 0.625);
      CHECK(c.get(key) == 0.625);
    }
  }

  SUBCASE("number parsing") {
    CHECK(parse_number("1/12") == doctest::Approx(1.0 / 12));
    CHECK(parse_number("-0.5") == -0.5);
    CHECK(parse_number("1e-3") == 1e-3);
    CHECK_THROWS_AS(parse_number("abc"), ScenarioError);
    CHECK_THROWS_AS(parse_number("1/0"), ScenarioError);
    CHECK_THROWS_AS(parse_number("2x"), ScenarioError);
  }

  SUBCASE("bad overrides") {
    CHECK_THROWS_AS(cfg.set("ctrl.kk", 1.0), ScenarioError);
    CHECK_THROWS_AS(apply_overrides(cfg, {"ctrl.k"}), ScenarioError);
    CHECK_THROWS_AS(apply_overrides(cfg, {"ctrl.k=x"}), ScenarioError);
    apply_overrides(cfg, {"ctrl.k=2.5", "plant.tau=1/10"});
    CHECK(cfg.ctrl.k == 2.5);
    CHECK(cfg.plant.tau == doctest::Approx(0.1));
  }
}

TEST_CASE("run_scenario: linear baseline") {
  const auto r = run_scenario("linear-baseline", {}, no_files());
  CHECK(r.pass);
  CHECK(r.metrics["closed_loop"]["hurwitz"] == true);
  CHECK(r.metrics["internal_model_residual"].get<double>() < 1e-3);
  CHECK(r.metrics["verdict"] == "pass");

  const auto off = run_scenario("linear-baseline", {"linear.omega=2"}, no_files());
  CHECK_FALSE(off.pass);

  const auto unstable = run_scenario("linear-baseline", {"linear.k_eta2=1.5"}, no_files());
  CHECK_FALSE(unstable.pass);
  CHECK(unstable.metrics["closed_loop"]["hurwitz"] == false);
  CHECK_FALSE(unstable.metrics.contains("francis"));
}

TEST_CASE("run_scenario: outputs and reproducibility") {
  const fs::path a = scratch("repro_a");
  const fs::path b = scratch("repro_b");
  ScenarioConfig cfg = lookup("rejection");
  cfg.t_final = 60;
  cfg.out_dir = a;
  const auto ra = run_scenario(cfg);
  cfg.out_dir = b;
  const auto rb = run_scenario(cfg);

  REQUIRE(fs::exists(ra.trajectory_csv));
  REQUIRE(fs::exists(ra.metrics_json));
  REQUIRE(fs::exists(ra.plot_svg));
  CHECK(ra.trajectory_csv.filename() == "rejection.csv");
  CHECK(slurp(ra.trajectory_csv) == slurp(rb.trajectory_csv));
  CHECK(slurp(ra.metrics_json) == slurp(rb.metrics_json));

  const auto json = nlohmann::json::parse(slurp(ra.metrics_json));
  for (const char* key : {"scenario", "mode", "params", "checks", "warnings", "verdict"}) {
    CHECK(json.contains(key));
  }
  const std::string header = slurp(ra.trajectory_csv).substr(0, 80);
  CHECK(header.rfind("t,x_w1,x_w2,x_w3,x_w4,x_p1,x_p2,x_eta1", 0) == 0);

  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("run_scenario: errors") {
  ScenarioConfig cfg = lookup("rejection");
  cfg.dt = 5.0;
  cfg.t_final = 100;
  CHECK_THROWS_AS(run_scenario(cfg, no_files()), IntegrationDiverged);

  cfg = lookup("rejection");
  cfg.ctrl.tau = -1;
  CHECK_THROWS_AS(run_scenario(cfg, no_files()), ScenarioError);

  cfg = lookup("rejection");
  cfg.dt = 0;
  CHECK_THROWS_AS(run_scenario(cfg, no_files()), ScenarioError);
}

TEST_CASE("sweep") {
  SUBCASE("mismatched gains never let y spike") {
    ScenarioConfig base = lookup("rejection-mismatch");
    const auto table = sweep(base, "k_eta", {2, 3, 4}, false);
    CHECK(table.key == "ctrl.k");
    REQUIRE(table.rows.size() == 3);
    for (const auto& row : table.rows) {
      CAPTURE(row.value);
      CHECK(row.status == "ok");
      CHECK(row.metrics["spike_counts"]["y"]["tail"] == 0);
    }
  }

  SUBCASE("single-value sweep agrees with a direct run") {
    const fs::path dir = scratch("sweep_single");
    ScenarioConfig base = lookup("rejection");
    base.t_final = 80;
    base.out_dir = dir;
    const auto table = sweep(base, "ctrl.k", {2}, true);
    base.out_dir = dir / "direct";
    const auto direct = run_scenario(base, no_files());
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0].metrics == direct.metrics);
    CHECK(fs::exists(table.csv_path));
    CHECK(table.csv_path.filename() == "rejection_sweep_ctrl.k.csv");
    CHECK(fs::exists(dir / "rejection_ctrl.k_2" / "rejection.csv"));
    fs::remove_all(dir);
  }

  SUBCASE("warnings and errors are recorded per row") {
    ScenarioConfig base = lookup("rejection");
    base.t_final = 40;
    const auto table = sweep(base, "k_w", {0.4, -1}, false);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].status == "ok");
    REQUIRE_FALSE(table.rows[0].warnings.empty());
    CHECK(table.rows[0].warnings[0].find("exo.k") != std::string::npos);
    CHECK(table.rows[1].status.rfind("error", 0) == 0);
  }

  SUBCASE("bad key") {
    CHECK_THROWS_AS(sweep(lookup("rejection"), "nope", {1}, false), ScenarioError);
  }
}

TEST_CASE("emit_plot") {
  const fs::path dir = scratch("plot");
  const fs::path csv = dir / "in.csv";
  {
    std::ofstream out(csv, std::ios::binary);
    out << "t,a,b,c\n";
    for (int i = 0; i < 5000; ++i) {
      out << i * 0.01 << ',' << std::sin(i * 0.01) << ',' << i << ",-1\n";
    }
  }
  plot::emit_plot(csv.string(), {"a"}, (dir / "one.svg").string());
  plot::emit_plot(csv.string(), {"a", "b", "c"}, (dir / "three.svg").string());
  plot::emit_plot(csv.string(), {"a", "b", "c"}, (dir / "again.svg").string());

  const std::string one = slurp(dir / "one.svg");
  const std::string three = slurp(dir / "three.svg");
  CHECK(one.rfind("<svg", 0) == 0);
  CHECK(count_of(one, "<polyline") == 1);
  CHECK(count_of(three, "<polyline") == 3);
  CHECK(three == slurp(dir / "again.svg"));
  CHECK(three.find(">b</text>") != std::string::npos);

  CHECK_THROWS_AS(plot::emit_plot(csv.string(), {"zz"}, (dir / "x.svg").string()),
                  plot::PlotError);
  CHECK_THROWS_AS(plot::emit_plot((dir / "missing.csv").string(), {"a"},
                                  (dir / "x.svg").string()),
                  plot::PlotError);
  fs::remove_all(dir);
}
