// eventreg: run, sweep and plot event-rejection scenarios.
//
// Exit codes: 0 verdict pass, 1 verdict fail, 2 configuration error,
// 3 numerical divergence.

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eventreg/dynamics.hpp"
#include "eventreg/plot.hpp"
#include "eventreg/scenario.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfigError = 2;
constexpr int kDiverged = 3;

using eventreg::scenario::ScenarioConfig;

std::string default_out_dir() {
  const char* env = std::getenv("EVENTREG_OUT");
  return env && *env ? env : "out";
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void print_result(const eventreg::scenario::ScenarioResult& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& c : r.checks) {
    std::cout << (c.pass ? "  ok    " : "  FAIL  ") << c.name << " = "
              << eventreg::format_number(c.value) << " (want " << c.op << ' '
              << eventreg::format_number(c.threshold) << ")\n";
  }
  if (!r.trajectory_csv.empty()) std::cout << "  csv     " << r.trajectory_csv.string() << '\n';
  if (!r.metrics_json.empty()) std::cout << "  metrics " << r.metrics_json.string() << '\n';
  if (!r.plot_svg.empty()) std::cout << "  plot    " << r.plot_svg.string() << '\n';
  std::cout << r.name << ": " << (r.pass ? "PASS" : "FAIL") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event disturbance rejection for FitzHugh-Nagumo loops"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List the scenario catalog");
  bool list_keys = false;
  list->add_flag("--keys", list_keys, "Also list every override key");

  auto* run = app.add_subcommand("run", "Run one scenario");
  std::string run_name;
  double run_dt = 0.0, run_t_final = 0.0;
  std::string run_out = default_out_dir();
  std::vector<std::string> run_sets;
  run->add_option("scenario", run_name, "Scenario name")->required();
  run->add_option("--dt", run_dt, "Integration step");
  run->add_option("--t-final", run_t_final, "Horizon");
  run->add_option("--out", run_out, "Output directory (default $EVENTREG_OUT or ./out)");
  run->add_option("--set", run_sets, "Override, key=value (repeatable)");

  auto* sweep = app.add_subcommand("sweep", "Run a scenario over parameter values");
  std::string sweep_name, sweep_key, sweep_values;
  std::string sweep_out = default_out_dir();
  std::vector<std::string> sweep_sets;
  sweep->add_option("scenario", sweep_name, "Scenario name")->required();
  sweep->add_option("--key", sweep_key, "Parameter to sweep")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep->add_option("--out", sweep_out, "Output directory");
  sweep->add_option("--set", sweep_sets, "Override, key=value (repeatable)");

  auto* plot = app.add_subcommand("plot", "Plot CSV columns to SVG");
  std::string plot_csv, plot_cols, plot_out;
  plot->add_option("csv", plot_csv, "Trajectory CSV")->required();
  plot->add_option("--cols", plot_cols, "Comma-separated columns")->required();
  plot->add_option("--out", plot_out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    if (*list) {
      for (const auto& c : eventreg::scenario::catalog()) {
        std::cout << std::left << std::setw(22) << c.name << c.description
                  << "\n" << std::setw(22) << "" << "defaults: " << c.provenance
                  << "\n";
      }
      if (list_keys) {
        std::cout << "\noverride keys:\n";
        for (const auto& k : ScenarioConfig{}.keys()) std::cout << "  " << k << '\n';
        std::cout << "aliases: k_w tau_w k_p tau_p k_eta tau_eta k_r tau_r "
                     "dt t_final tail_fraction\n";
      }
      return kPass;
    }

    if (*run) {
      ScenarioConfig cfg = eventreg::scenario::lookup(run_name);
      cfg.out_dir = run_out;
      if (run->count("--dt")) cfg.set("sim.dt", run_dt);
      if (run->count("--t-final")) cfg.set("sim.t_final", run_t_final);
      eventreg::scenario::apply_overrides(cfg, run_sets);
      const auto result = eventreg::scenario::run_scenario(cfg);
      print_result(result);
      return result.pass ? kPass : kFail;
    }

    if (*sweep) {
      ScenarioConfig cfg = eventreg::scenario::lookup(sweep_name);
      cfg.out_dir = sweep_out;
      eventreg::scenario::apply_overrides(cfg, sweep_sets);
      std::vector<double> values;
      for (const auto& v : split(sweep_values, ',')) {
        values.push_back(eventreg::scenario::parse_number(v));
      }
      const auto table = eventreg::scenario::sweep(cfg, sweep_key, values);
      bool all_pass = true;
      for (const auto& row : table.rows) {
        const bool ok = row.status == "ok";
        all_pass = all_pass && ok && row.pass;
        std::cout << table.key << '=' << eventreg::format_number(row.value) << ": "
                  << (ok ? (row.pass ? "PASS" : "FAIL") : row.status);
        for (const auto& w : row.warnings) std::cout << " [warning: " << w << ']';
        std::cout << '\n';
      }
      std::cout << "table: " << table.csv_path.string() << '\n';
      return all_pass ? kPass : kFail;
    }

    if (*plot) {
      eventreg::plot::emit_plot(plot_csv, split(plot_cols, ','), plot_out);
      std::cout << plot_out << '\n';
      return kPass;
    }
  } catch (const eventreg::IntegrationDiverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
