#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eventreg/neuro_models.hpp"
#include "json.hpp"

namespace eventreg::scenario {

/// Unknown scenario, bad override or inconsistent configuration.
class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Mode {
  kLinearBaseline,
  kRejection,
  kRejectionMismatch,
  kNoContractionDemo,
  kOpenSystem,
  kSingleNeuronFail,
  kAntiphaseDemo,
  kPassAllDemo,
};

std::string to_string(Mode mode);

/// Periodic rectangular pulse: `amplitude` for the first `duty` fraction of
/// every `period`, zero otherwise.
struct PulseTrain {
  double amplitude = 1.5;
  double duty = 0.2;
  double period = 40.0;

  double operator()(double t) const;
};

struct LinearSetup {
  double k_y = 0.0;
  double k_eta1 = 1.0;
  double k_eta2 = 0.5;
  /// Frequency of the controller's internal model; 1 matches the exosystem.
  double omega = 1.0;
  double plant0 = 0.0;
  Eigen::Vector2d ctrl0 = Eigen::Vector2d::Zero();
  Eigen::Vector2d exo0{1.0, 0.0};
};

struct PassAllSetup {
  double k = 2.0;
  double tau = 1.0 / 12.0;
  Eigen::Vector2d source0{0.5, 0.0};
  Eigen::Vector2d driven0 = Eigen::Vector2d::Zero();
};

struct ScenarioConfig {
  std::string name;
  Mode mode = Mode::kRejection;
  std::string description;
  /// Which experiment the defaults reproduce and where the tuple comes from.
  std::string provenance;

  neuro::ExoParams exo{2.0, 1.0 / 12.0};
  neuro::PlantParams plant{1.0, 1.0 / 11.0};
  neuro::CtrlParams ctrl{2.0, 1.0 / 12.0};
  neuro::RefParams ref{1.0, 1.0 / 11.0};
  PulseTrain v;

  Eigen::Vector4d exo0{0.5, 0.0, -0.5, 0.0};
  Eigen::Vector2d plant0 = Eigen::Vector2d::Zero();
  Eigen::Vector4d ctrl0 = Eigen::Vector4d::Zero();
  Eigen::Vector2d ref0 = Eigen::Vector2d::Zero();
  /// Plant+controller initial states (x_p1 x_p2 x_eta1..x_eta4) for the
  /// input-dependent contraction demo.
  std::array<Eigen::Matrix<double, 6, 1>, 4> demo_ics;

  LinearSetup linear;
  PassAllSetup pass_all;

  double dt = 1e-3;
  double t_final = 500.0;
  double tail_fraction = 0.4;
  double spike_threshold = 1.0;
  double spike_refractory = 5.0;
  double jitter_tol = 2.0;

  std::filesystem::path out_dir = "out";

  ScenarioConfig();

  /// Assigns a numeric parameter by dotted key (e.g. "ctrl.k") or alias
  /// (e.g. "k_eta"). Values may be written as fractions ("1/12").
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  double get(const std::string& key) const;
  /// Every settable key, dotted form, in a fixed order.
  std::vector<std::string> keys() const;

  /// Closed-loop description for the FN modes.
  neuro::ClosedLoopConfig closed_loop() const;
};

/// Resolves aliases such as k_eta -> ctrl.k. Throws on unknown keys.
std::string canonical_key(const std::string& key);

/// Parses "3", "-0.5", "1e-3" or "1/12".
double parse_number(const std::string& text);

/// One entry per scenario name, defaults included.
const std::vector<ScenarioConfig>& catalog();
ScenarioConfig lookup(const std::string& name);

struct Check {
  std::string name;
  double value;
  std::string op;  ///< "<", ">", "==" or ">="
  double threshold;
  bool pass;
};

struct ScenarioResult {
  std::string name;
  nlohmann::ordered_json metrics;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  bool pass = false;
  std::filesystem::path trajectory_csv;
  std::filesystem::path metrics_json;
  std::filesystem::path plot_svg;
};

struct RunOptions {
  bool write_outputs = true;
  /// Stem for output files; the scenario name when empty.
  std::string file_stem;
};

/// Builds, integrates and analyzes one scenario. Throws ScenarioError on bad
/// configuration and IntegrationDiverged when the integration blows up.
ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            const RunOptions& opts = {});

/// Convenience: catalog lookup plus "key=value" overrides.
ScenarioResult run_scenario(const std::string& name,
                            const std::vector<std::string>& overrides,
                            const RunOptions& opts = {});

void apply_overrides(ScenarioConfig& cfg,
                     const std::vector<std::string>& overrides);

struct SweepRow {
  double value;
  std::string status;  ///< "ok" or the error message
  bool pass = false;
  std::vector<std::string> warnings;
  nlohmann::ordered_json metrics;
};

struct SweepTable {
  std::string scenario;
  std::string key;
  std::vector<SweepRow> rows;
  std::filesystem::path csv_path;
};

/// One run per value, each writing into its own subdirectory of out_dir,
/// then a summary CSV `<scenario>_sweep_<key>.csv`.
SweepTable sweep(const ScenarioConfig& base, const std::string& key,
                 const std::vector<double>& values, bool write_outputs = true);

}  // namespace eventreg::scenario
