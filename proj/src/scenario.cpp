#include "eventreg/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <type_traits>
#include <utility>

#include "eventreg/dynamics.hpp"
#include "eventreg/event_analysis.hpp"
#include "eventreg/linear_motif.hpp"
#include "eventreg/plot.hpp"

namespace eventreg::scenario {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kLinearBaseline: return "linear-baseline";
    case Mode::kRejection: return "rejection";
    case Mode::kRejectionMismatch: return "rejection-mismatch";
    case Mode::kNoContractionDemo: return "no-contraction-demo";
    case Mode::kOpenSystem: return "open-system";
    case Mode::kSingleNeuronFail: return "single-neuron-fail";
    case Mode::kAntiphaseDemo: return "antiphase-demo";
    case Mode::kPassAllDemo: return "pass-all-demo";
  }
  return "unknown";
}

double PulseTrain::operator()(double t) const {
  const double phase = t - period * std::floor(t / period);
  return phase < duty * period ? amplitude : 0.0;
}

// ---------------------------------------------------------------------------
// Parameter table

namespace {

template <typename Cfg>
auto param_table(Cfg& c) {
  using Ptr = std::conditional_t<std::is_const_v<Cfg>, const double*, double*>;
  std::vector<std::pair<std::string, Ptr>> t = {
      {"exo.k", &c.exo.k},
      {"exo.tau", &c.exo.tau},
      {"plant.k", &c.plant.k},
      {"plant.tau", &c.plant.tau},
      {"ctrl.k", &c.ctrl.k},
      {"ctrl.tau", &c.ctrl.tau},
      {"ref.k", &c.ref.k},
      {"ref.tau", &c.ref.tau},
      {"v.amplitude", &c.v.amplitude},
      {"v.duty", &c.v.duty},
      {"v.period", &c.v.period},
  };
  for (int i = 0; i < 4; ++i) {
    t.emplace_back("ic.exo." + std::to_string(i), &c.exo0(i));
  }
  for (int i = 0; i < 2; ++i) {
    t.emplace_back("ic.plant." + std::to_string(i), &c.plant0(i));
  }
  for (int i = 0; i < 4; ++i) {
    t.emplace_back("ic.ctrl." + std::to_string(i), &c.ctrl0(i));
  }
  for (int i = 0; i < 2; ++i) {
    t.emplace_back("ic.ref." + std::to_string(i), &c.ref0(i));
  }
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < 6; ++i) {
      t.emplace_back("demo.ic" + std::to_string(k) + "." + std::to_string(i),
                     &c.demo_ics[static_cast<std::size_t>(k)](i));
    }
  }
  t.emplace_back("linear.k_y", &c.linear.k_y);
  t.emplace_back("linear.k_eta1", &c.linear.k_eta1);
  t.emplace_back("linear.k_eta2", &c.linear.k_eta2);
  t.emplace_back("linear.omega", &c.linear.omega);
  t.emplace_back("linear.ic.plant", &c.linear.plant0);
  t.emplace_back("linear.ic.ctrl.0", &c.linear.ctrl0(0));
  t.emplace_back("linear.ic.ctrl.1", &c.linear.ctrl0(1));
  t.emplace_back("linear.ic.exo.0", &c.linear.exo0(0));
  t.emplace_back("linear.ic.exo.1", &c.linear.exo0(1));
  t.emplace_back("pass_all.k", &c.pass_all.k);
  t.emplace_back("pass_all.tau", &c.pass_all.tau);
  t.emplace_back("pass_all.ic.source.0", &c.pass_all.source0(0));
  t.emplace_back("pass_all.ic.source.1", &c.pass_all.source0(1));
  t.emplace_back("pass_all.ic.driven.0", &c.pass_all.driven0(0));
  t.emplace_back("pass_all.ic.driven.1", &c.pass_all.driven0(1));
  t.emplace_back("sim.dt", &c.dt);
  t.emplace_back("sim.t_final", &c.t_final);
  t.emplace_back("sim.tail_fraction", &c.tail_fraction);
  t.emplace_back("spike.threshold", &c.spike_threshold);
  t.emplace_back("spike.refractory", &c.spike_refractory);
  t.emplace_back("spike.jitter_tol", &c.jitter_tol);
  return t;
}

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> table = {
      {"k_w", "exo.k"},      {"tau_w", "exo.tau"},  {"k_p", "plant.k"},
      {"tau_p", "plant.tau"}, {"k_eta", "ctrl.k"},   {"tau_eta", "ctrl.tau"},
      {"k_r", "ref.k"},      {"tau_r", "ref.tau"},  {"dt", "sim.dt"},
      {"t_final", "sim.t_final"}, {"tail_fraction", "sim.tail_fraction"},
  };
  return table;
}

template <typename Cfg>
auto find_param(Cfg& c, const std::string& key) {
  const std::string canon = canonical_key(key);
  for (auto& [name, ptr] : param_table(c)) {
    if (name == canon) return ptr;
  }
  throw ScenarioError("unknown parameter '" + key + "'");
}

double parse_plain(const std::string& text) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ScenarioError("not a number: '" + text + "'");
  }
  return v;
}

}  // namespace

std::string canonical_key(const std::string& key) {
  auto it = aliases().find(key);
  const std::string canon = it == aliases().end() ? key : it->second;
  const ScenarioConfig probe;
  for (const auto& [name, ptr] : param_table(probe)) {
    if (name == canon) return canon;
  }
  throw ScenarioError("unknown parameter '" + key + "'");
}

double parse_number(const std::string& text) {
  const auto slash = text.find('/');
  double v;
  if (slash == std::string::npos) {
    v = parse_plain(text);
  } else {
    const double den = parse_plain(text.substr(slash + 1));
    if (den == 0.0) throw ScenarioError("division by zero in '" + text + "'");
    v = parse_plain(text.substr(0, slash)) / den;
  }
  if (!std::isfinite(v)) throw ScenarioError("non-finite value '" + text + "'");
  return v;
}

ScenarioConfig::ScenarioConfig() {
  demo_ics[0] << 0.0, 0.0, 0.0, 0.0, 0.0, 0.0;
  demo_ics[1] << 0.5, 0.0, 0.5, 0.0, -0.5, 0.0;
  demo_ics[2] << -0.5, 0.0, -0.5, 0.0, 0.5, 0.0;
  demo_ics[3] << 0.0, 0.5, 1.0, 0.0, -1.0, 0.0;
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
  set(key, parse_number(value));
}

void ScenarioConfig::set(const std::string& key, double value) {
  *find_param(*this, key) = value;
}

double ScenarioConfig::get(const std::string& key) const {
  return *find_param(*this, key);
}

std::vector<std::string> ScenarioConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [name, ptr] : param_table(*this)) out.push_back(name);
  return out;
}

neuro::ClosedLoopConfig ScenarioConfig::closed_loop() const {
  neuro::ClosedLoopConfig c;
  c.exo = exo;
  c.plant = plant;
  c.ctrl = ctrl;
  c.exo0 = exo0;
  c.plant0 = plant0;
  c.ctrl0 = ctrl0;
  c.ref0 = ref0;
  if (mode == Mode::kOpenSystem) {
    c.mode = neuro::LoopMode::kOpenSystem;
    c.ref = ref;
    c.v = Signal(v);
  }
  if (mode == Mode::kSingleNeuronFail) {
    c.controller = neuro::ControllerKind::kSingleNeuron;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Catalog

const std::vector<ScenarioConfig>& catalog() {
  static const std::vector<ScenarioConfig> entries = [] {
    std::vector<ScenarioConfig> list;
    auto add = [&](std::string name, Mode mode, std::string description,
                   std::string provenance, auto&& tweak) {
      ScenarioConfig c;
      c.name = std::move(name);
      c.mode = mode;
      c.description = std::move(description);
      c.provenance = std::move(provenance);
      tweak(c);
      list.push_back(std::move(c));
    };

    add("linear-baseline", Mode::kLinearBaseline,
        "harmonic exosystem, first-order plant, internal-model controller",
        "linear motif: Phi=[[0,1],[-1,0]], G=(1,0), (k_y, K_eta)=(0, (1, 0.5)) "
        "inside K_eta1 > -K_eta2, K_eta2 < 1",
        [](ScenarioConfig& c) {
          c.t_final = 100.0;
          c.tail_fraction = 0.2;
        });
    add("rejection", Mode::kRejection,
        "FN exosystem, plant and matched two-neuron internal model",
        "exact-rejection experiment: (k_p,tau_p)=(1,1/11), "
        "(k_w,tau_w)=(k_eta,tau_eta)=(2,1/12)",
        [](ScenarioConfig& c) {
          c.exo = {2.0, 1.0 / 12.0};
          c.ctrl = {2.0, 1.0 / 12.0};
        });
    add("rejection-mismatch", Mode::kRejectionMismatch,
        "internal model detuned from the exosystem; spikes still rejected",
        "mismatch experiment: (k_p,tau_p)=(1,1/11), (k_w,tau_w)=(1,1/12), "
        "(k_eta,tau_eta)=(3,1/16)",
        [](ScenarioConfig& c) {
          c.exo = {1.0, 1.0 / 12.0};
          c.ctrl = {3.0, 1.0 / 16.0};
        });
    add("no-contraction-demo", Mode::kNoContractionDemo,
        "plant+controller from 4 initial conditions with w off and on",
        "input-dependent contraction experiment: (k_p,tau_p)=(1,1/11), "
        "(k_eta,tau_eta)=(2,1/12)",
        [](ScenarioConfig& c) {
          c.exo = {2.0, 1.0 / 12.0};
          c.ctrl = {2.0, 1.0 / 12.0};
        });
    add("open-system", Mode::kOpenSystem,
        "plant and reference driven by pulse train v; controller fed e = y - y_r",
        "open-system experiment: (k_p,tau_p)=(1,1/11), (k_r,tau_r)=(3,1/13), "
        "(k_w,tau_w)=(1,1/12), (k_eta,tau_eta)=(4,1/15)",
        [](ScenarioConfig& c) {
          c.exo = {1.0, 1.0 / 12.0};
          c.ctrl = {4.0, 1.0 / 15.0};
          c.ref = {3.0, 1.0 / 13.0};
        });
    add("single-neuron-fail", Mode::kSingleNeuronFail,
        "one-neuron internal model at exact parameters; rejection must fail",
        "single-neuron counterexample: (k_p,tau_p)=(1,1/11), "
        "(k_w,tau_w)=(2,1/12), controller (k_w, tau)=(2,1/12)",
        [](ScenarioConfig& c) {
          c.exo = {2.0, 1.0 / 12.0};
          c.ctrl = {2.0, 1.0 / 12.0};
        });
    add("antiphase-demo", Mode::kAntiphaseDemo,
        "two mutually inhibiting FN neurons settle into antiphase",
        "exosystem antiphase property: k_w > 1/2, here (k_w,tau_w)=(2,1/12)",
        [](ScenarioConfig& c) {
          c.exo = {2.0, 1.0 / 12.0};
          // Off the antisymmetric manifold, so antiphase has to emerge.
          c.exo0 << 1.0, 0.2, -0.3, 0.0;
        });
    add("pass-all-demo", Mode::kPassAllDemo,
        "FN neuron (k=2) driven by an uncoupled FN output reproduces it",
        "pass-all property: driven gain k=2, source k=0, tau=1/12",
        [](ScenarioConfig&) {});
    return list;
  }();
  return entries;
}

ScenarioConfig lookup(const std::string& name) {
  for (const auto& c : catalog()) {
    if (c.name == name) return c;
  }
  throw ScenarioError("unknown scenario '" + name + "'");
}

void apply_overrides(ScenarioConfig& cfg,
                     const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ScenarioError("override must be key=value: '" + item + "'");
    }
    cfg.set(item.substr(0, eq), item.substr(eq + 1));
  }
}

// ---------------------------------------------------------------------------
// Running

namespace {

class Verdict {
 public:
  void check(std::string name, double value, std::string op, double threshold) {
    bool pass = false;
    if (op == "<") pass = value < threshold;
    else if (op == ">") pass = value > threshold;
    else if (op == ">=") pass = value >= threshold;
    else if (op == "==") pass = value == threshold;
    checks_.push_back({std::move(name), value, std::move(op), threshold, pass});
  }

  const std::vector<Check>& checks() const { return checks_; }
  bool pass() const {
    return std::all_of(checks_.begin(), checks_.end(),
                       [](const Check& c) { return c.pass; });
  }

 private:
  std::vector<Check> checks_;
};

void validate_common(const ScenarioConfig& c) {
  if (!(c.dt > 0)) throw ScenarioError("sim.dt must be > 0");
  if (!(c.t_final > 0)) throw ScenarioError("sim.t_final must be > 0");
  if (!(c.tail_fraction > 0 && c.tail_fraction <= 1)) {
    throw ScenarioError("sim.tail_fraction must lie in (0, 1]");
  }
  if (!(c.spike_refractory >= 0)) {
    throw ScenarioError("spike.refractory must be >= 0");
  }
  if (!(c.jitter_tol > 0)) throw ScenarioError("spike.jitter_tol must be > 0");
  if (c.mode == Mode::kOpenSystem &&
      (!(c.v.period > 0) || c.v.duty < 0 || c.v.duty > 1)) {
    throw ScenarioError("v.period must be > 0 and v.duty in [0, 1]");
  }
}

std::vector<std::string> relevant_prefixes(Mode mode) {
  switch (mode) {
    case Mode::kLinearBaseline: return {"linear.", "sim."};
    case Mode::kAntiphaseDemo: return {"exo.", "ic.exo.", "sim."};
    case Mode::kPassAllDemo: return {"pass_all.", "sim."};
    case Mode::kNoContractionDemo:
      return {"exo.", "plant.", "ctrl.", "ic.exo.", "demo.", "sim."};
    case Mode::kOpenSystem:
      return {"exo.", "plant.", "ctrl.", "ref.", "v.", "ic.", "sim.", "spike."};
    default:
      return {"exo.", "plant.", "ctrl.", "ic.exo.", "ic.plant.", "ic.ctrl.",
              "sim.", "spike."};
  }
}

ordered_json params_json(const ScenarioConfig& c) {
  ordered_json params = ordered_json::object();
  const auto prefixes = relevant_prefixes(c.mode);
  for (const auto& [key, ptr] : param_table(c)) {
    for (const auto& p : prefixes) {
      if (key.rfind(p, 0) == 0) {
        params[key] = *ptr;
        break;
      }
    }
  }
  return params;
}

ordered_json spike_json(const analysis::SpikeTrain& train, double tail_start,
                        double t_end) {
  return {{"total", train.size()}, {"tail", train.count_in(tail_start, t_end)}};
}

struct Outputs {
  const Trajectory* traj = nullptr;
  std::vector<DerivedColumn> extra;
  std::vector<std::string> plot_columns;
};

struct Context {
  const ScenarioConfig& cfg;
  ordered_json metrics;
  Verdict verdict;
  std::vector<std::string> warnings;
};

analysis::SpikeTrain spikes_of(const Context& ctx, const std::vector<double>& t,
                               const std::vector<double>& y) {
  return analysis::detect_spikes(t, y, ctx.cfg.spike_threshold,
                                 ctx.cfg.spike_refractory);
}

void write_outputs(const ScenarioConfig& cfg, const RunOptions& opts,
                   const Trajectory& traj, const std::vector<DerivedColumn>& extra,
                   const std::vector<std::string>& plot_columns,
                   ScenarioResult& result) {
  const std::string stem = opts.file_stem.empty() ? cfg.name : opts.file_stem;
  fs::create_directories(cfg.out_dir);
  result.trajectory_csv = cfg.out_dir / (stem + ".csv");
  result.plot_svg = cfg.out_dir / (stem + ".svg");
  write_csv(result.trajectory_csv.string(), traj, extra);

  std::vector<plot::Series> series;
  for (const auto& name : plot_columns) {
    auto it = std::find_if(extra.begin(), extra.end(),
                           [&](const DerivedColumn& d) { return d.label == name; });
    if (it != extra.end()) {
      series.push_back({name, it->values});
    } else {
      series.push_back({name, traj.column(name)});
    }
  }
  std::ofstream svg(result.plot_svg, std::ios::binary);
  svg << plot::render_svg(traj.times(), series);
}

// Each runner fills metrics/checks and returns the trajectory to export.
struct RunOutput {
  std::optional<Trajectory> traj;
  std::vector<DerivedColumn> extra;
  std::vector<std::string> plot_columns;
};

RunOutput run_linear(Context& ctx) {
  const auto& c = ctx.cfg;
  linear::ControllerParams params = linear::default_controller(c.linear.omega);
  params.k_y = c.linear.k_y;
  params.k_eta << c.linear.k_eta1, c.linear.k_eta2;
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }

  const Eigen::Matrix3d a_cl = linear::closed_loop_matrix(params);
  const auto hurwitz = linear::is_hurwitz(a_cl);
  ctx.metrics["closed_loop"] = {
      {"spectral_abscissa", hurwitz.spectral_abscissa},
      {"hurwitz", hurwitz.hurwitz},
      {"embeds_exosystem_frequency", params.embeds_unit_frequency()}};
  ctx.verdict.check("closed_loop_spectral_abscissa", hurwitz.spectral_abscissa,
                    "<", -1e-9);
  if (!hurwitz.hurwitz) return {};

  const auto francis =
      linear::solve_francis(a_cl, linear::disturbance_input(),
                            linear::exosystem_matrix(), linear::exosystem_output());
  ordered_json pi = ordered_json::array();
  for (int i = 0; i < 3; ++i) pi.push_back({francis.pi(i, 0), francis.pi(i, 1)});
  ctx.metrics["francis"] = {{"pi", pi}, {"residual", francis.residual}};

  Trajectory traj = linear::simulate_closed_loop(
      params, c.linear.plant0, c.linear.ctrl0, c.linear.exo0, c.t_final, c.dt);
  const auto sig = linear::linear_signals(traj, params);
  const auto err = analysis::steady_state_error(sig.y, c.tail_fraction);
  const double deviation =
      linear::steady_state_deviation(traj, francis.pi, c.tail_fraction);
  double im_residual = 0.0;
  for (std::size_t i = traj.tail_begin(c.tail_fraction); i < traj.size(); ++i) {
    const auto s = traj.state(i);
    const double model = params.k_eta(0) * s[1] + params.k_eta(1) * s[2];
    im_residual = std::max(im_residual, std::abs(model - sig.w[i]));
  }
  ctx.metrics["steady_state_error"] = {
      {"signal", "y"}, {"max_abs", err.max_abs}, {"rms", err.rms}};
  ctx.metrics["steady_state_deviation"] = deviation;
  ctx.metrics["internal_model_residual"] = im_residual;
  ctx.verdict.check("y_tail_max_abs", err.max_abs, "<", 1e-3);
  ctx.verdict.check("steady_state_deviation", deviation, "<", 1e-3);

  RunOutput out;
  out.extra = {{"w", sig.w}, {"u", sig.u}, {"y", sig.y}};
  out.plot_columns = {"w", "u", "y"};
  out.traj = std::move(traj);
  return out;
}

RunOutput run_closed_loop(Context& ctx) {
  const auto& c = ctx.cfg;
  neuro::ClosedLoop loop = neuro::assemble_closed_loop(c.closed_loop());
  Trajectory traj =
      integrate(loop.field, loop.initial_state, 0.0, c.t_final, c.dt, loop.inputs);
  const auto sig = neuro::loop_signals(traj, loop);
  const auto& t = traj.times();
  const double tail_start = t[traj.tail_begin(c.tail_fraction)];
  const double t_end = t.back();

  const auto spikes_w = spikes_of(ctx, t, sig.w);
  const auto spikes_y = spikes_of(ctx, t, sig.y);
  const auto err = analysis::steady_state_error(sig.y, c.tail_fraction);
  const auto anti = analysis::antiphase_metric(traj, c.tail_fraction);

  ordered_json counts = {{"w", spike_json(spikes_w, tail_start, t_end)},
                         {"y", spike_json(spikes_y, tail_start, t_end)}};
  ctx.metrics["steady_state_error"] = {
      {"signal", "y"}, {"max_abs", err.max_abs}, {"rms", err.rms}};
  ctx.metrics["antiphase"] = {{"metric", anti.metric},
                              {"amplitude", anti.amplitude}};

  const auto y_tail = static_cast<double>(spikes_y.count_in(tail_start, t_end));
  switch (c.mode) {
    case Mode::kRejection:
      ctx.verdict.check("y_tail_max_abs", err.max_abs, "<", 0.05);
      ctx.verdict.check("y_tail_spikes", y_tail, "==", 0);
      break;
    case Mode::kRejectionMismatch:
      ctx.verdict.check("y_tail_spikes", y_tail, "==", 0);
      ctx.verdict.check("y_tail_max_abs", err.max_abs, ">", 0.01);
      break;
    case Mode::kSingleNeuronFail:
      ctx.verdict.check("y_tail_spikes", y_tail, ">", 0);
      break;
    case Mode::kOpenSystem: {
      const auto spikes_r = spikes_of(ctx, t, sig.y_r);
      counts["y_r"] = spike_json(spikes_r, tail_start, t_end);
      const auto match =
          analysis::spike_pattern_match(spikes_y, spikes_r, c.jitter_tol);
      const auto e_err = analysis::steady_state_error(sig.e, c.tail_fraction);
      double worst = 0.0;
      for (double o : match.offsets) worst = std::max(worst, std::abs(o));
      ctx.metrics["error_signal"] = {
          {"signal", "e"}, {"max_abs", e_err.max_abs}, {"rms", e_err.rms}};
      ctx.metrics["pattern_match"] = {{"matched", match.matched},
                                      {"jitter_tol", c.jitter_tol},
                                      {"max_abs_offset", worst},
                                      {"offsets", match.offsets}};
      ctx.verdict.check("pattern_matched", match.matched ? 1.0 : 0.0, "==", 1.0);
      ctx.verdict.check("e_tail_max_abs", e_err.max_abs, ">", 0.01);
      break;
    }
    default:
      break;
  }
  ctx.metrics["spike_counts"] = counts;

  RunOutput out;
  out.extra = neuro::derived_columns(sig, loop.config.mode);
  out.plot_columns = {"w", "u", "y"};
  if (c.mode == Mode::kOpenSystem) out.plot_columns = {"y", "y_r", "e"};
  out.traj = std::move(traj);
  return out;
}

RunOutput run_no_contraction(Context& ctx) {
  const auto& c = ctx.cfg;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> ys;
  ordered_json conv = ordered_json::object();

  for (bool w_on : {false, true}) {
    neuro::ClosedLoopConfig lc = c.closed_loop();
    lc.disturbance_enabled = w_on;
    const neuro::ClosedLoop loop = neuro::assemble_closed_loop(lc);
    std::vector<Eigen::VectorXd> ics;
    for (const auto& ic : c.demo_ics) {
      Eigen::VectorXd x0 = loop.initial_state;
      x0.segment<6>(4) = ic;
      ics.push_back(x0);
    }
    analysis::ConvergenceOptions opts;
    opts.t_final = c.t_final;
    opts.dt = c.dt;
    opts.tail_fraction = c.tail_fraction;
    opts.tolerance = 1e-2;
    const std::string tag = w_on ? "w_on" : "w_off";
    opts.observer = [&](std::size_t k, const Trajectory& traj) {
      labels.push_back("y_" + tag + "_" + std::to_string(k));
      ys.push_back(traj.column("x_p1"));
    };
    const auto report = analysis::convergence_test(loop.field, ics, loop.inputs, opts);
    conv[tag] = {{"n_initial_conditions", report.n_initial_conditions},
                 {"tail_pairwise_max_distance", report.tail_pairwise_max_distance},
                 {"tolerance", report.tolerance},
                 {"converged", report.converged}};
    if (w_on) {
      ctx.verdict.check("w_on_tail_pairwise_distance",
                        report.tail_pairwise_max_distance, "<", 1e-2);
    } else {
      ctx.verdict.check("w_off_tail_pairwise_distance",
                        report.tail_pairwise_max_distance, ">", 0.1);
    }
  }
  conv["note"] =
      "numerical evidence of input-dependent convergence, not a certificate";
  ctx.metrics["convergence"] = conv;

  RunOutput out;
  Trajectory table(labels, 0.0, c.dt);
  Eigen::VectorXd row(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < ys.front().size(); ++i) {
    for (std::size_t k = 0; k < ys.size(); ++k) {
      row(static_cast<Eigen::Index>(k)) = ys[k][i];
    }
    table.push_back(row);
  }
  out.plot_columns = labels;
  out.traj = std::move(table);
  return out;
}

RunOutput run_antiphase(Context& ctx) {
  const auto& c = ctx.cfg;
  if (!(c.exo.k > 0) || !(c.exo.tau > 0)) {
    throw ScenarioError("exo: k and tau must be > 0");
  }
  if (c.exo.k <= 0.5) {
    ctx.warnings.push_back("exo.k <= 1/2: antiphase oscillation not guaranteed");
  }
  Trajectory traj = integrate(neuro::exosystem_field(c.exo), Eigen::VectorXd(c.exo0),
                              0.0, c.t_final, c.dt);
  const auto anti = analysis::antiphase_metric(traj, c.tail_fraction);
  ctx.metrics["antiphase"] = {{"metric", anti.metric},
                              {"amplitude", anti.amplitude}};
  const auto spikes = spikes_of(ctx, traj.times(), traj.column("x_w1"));
  const double tail_start = traj.times()[traj.tail_begin(c.tail_fraction)];
  ctx.metrics["spike_counts"] = {
      {"w", spike_json(spikes, tail_start, traj.times().back())}};
  ctx.verdict.check("antiphase_metric", anti.metric, "<", 1e-2);
  ctx.verdict.check("y_w1_amplitude", anti.amplitude, ">", 1.0);

  RunOutput out;
  out.plot_columns = {"x_w1", "x_w3"};
  out.traj = std::move(traj);
  return out;
}

RunOutput run_pass_all(Context& ctx) {
  const auto& c = ctx.cfg;
  if (!(c.pass_all.k > 0) || !(c.pass_all.tau > 0)) {
    throw ScenarioError("pass_all: k and tau must be > 0");
  }
  if (c.pass_all.k <= 1.0) {
    ctx.warnings.push_back("pass_all.k <= 1: driven neuron not certified convergent");
  }
  Eigen::VectorXd x0(4);
  x0 << c.pass_all.source0, c.pass_all.driven0;
  Trajectory traj = integrate(neuro::pass_all_field(c.pass_all.k, c.pass_all.tau),
                              x0, 0.0, c.t_final, c.dt);
  const auto z = traj.column("x_s1");
  const auto y = traj.column("x_1");
  std::vector<double> diff(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) diff[i] = y[i] - z[i];
  const auto err = analysis::steady_state_error(diff, c.tail_fraction);
  ctx.metrics["tracking_error"] = {
      {"signal", "y - z"}, {"max_abs", err.max_abs}, {"rms", err.rms}};
  ctx.verdict.check("tracking_error_tail_max_abs", err.max_abs, "<", 1e-2);

  RunOutput out;
  out.extra = {{"z", z}, {"y", y}, {"y_minus_z", diff}};
  out.plot_columns = {"z", "y"};
  out.traj = std::move(traj);
  return out;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  validate_common(cfg);

  Context ctx{cfg, ordered_json::object(), {}, {}};
  ctx.metrics["scenario"] = cfg.name;
  ctx.metrics["mode"] = to_string(cfg.mode);
  ctx.metrics["params"] = params_json(cfg);

  RunOutput out;
  try {
    switch (cfg.mode) {
      case Mode::kLinearBaseline:
        out = run_linear(ctx);
        break;
      case Mode::kNoContractionDemo:
        ctx.warnings = cfg.closed_loop().validate();
        out = run_no_contraction(ctx);
        break;
      case Mode::kAntiphaseDemo:
        out = run_antiphase(ctx);
        break;
      case Mode::kPassAllDemo:
        out = run_pass_all(ctx);
        break;
      default:
        ctx.warnings = cfg.closed_loop().validate();
        out = run_closed_loop(ctx);
        break;
    }
  } catch (const neuro::ConfigError& e) {
    throw ScenarioError(e.what());
  } catch (const analysis::AnalysisError& e) {
    throw ScenarioError(e.what());
  }

  ScenarioResult result;
  result.name = cfg.name;
  result.checks = ctx.verdict.checks();
  result.pass = ctx.verdict.pass();
  result.warnings = ctx.warnings;

  ordered_json checks = ordered_json::array();
  for (const auto& c : result.checks) {
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"op", c.op},
                      {"threshold", c.threshold},
                      {"pass", c.pass}});
  }
  ctx.metrics["checks"] = checks;
  ctx.metrics["warnings"] = result.warnings;
  ctx.metrics["verdict"] = result.pass ? "pass" : "fail";
  result.metrics = std::move(ctx.metrics);

  if (opts.write_outputs) {
    if (out.traj) {
      write_outputs(cfg, opts, *out.traj, out.extra, out.plot_columns, result);
    }
    fs::create_directories(cfg.out_dir);
    const std::string stem = opts.file_stem.empty() ? cfg.name : opts.file_stem;
    result.metrics_json = cfg.out_dir / (stem + ".metrics.json");
    std::ofstream js(result.metrics_json, std::ios::binary);
    js << result.metrics.dump(2) << '\n';
  }
  return result;
}

ScenarioResult run_scenario(const std::string& name,
                            const std::vector<std::string>& overrides,
                            const RunOptions& opts) {
  ScenarioConfig cfg = lookup(name);
  apply_overrides(cfg, overrides);
  return run_scenario(cfg, opts);
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

std::string lookup_number(const ordered_json& metrics, const std::string& ptr) {
  const ordered_json::json_pointer p(ptr);
  if (!metrics.contains(p) || !metrics.at(p).is_number()) return "";
  return format_number(metrics.at(p).get<double>());
}

std::string csv_cell(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

SweepTable sweep(const ScenarioConfig& base, const std::string& key,
                 const std::vector<double>& values, bool write_outputs) {
  const std::string canon = canonical_key(key);
  if (values.empty()) throw ScenarioError("sweep: no values given");

  SweepTable table{base.name, canon, {}, {}};
  for (double value : values) {
    ScenarioConfig cfg = base;
    cfg.set(canon, value);
    const std::string tag = base.name + "_" + canon + "_" + format_number(value);
    cfg.out_dir = base.out_dir / tag;

    SweepRow row{value, "ok", false, {}, ordered_json::object()};
    try {
      ScenarioResult r = run_scenario(cfg, RunOptions{write_outputs, base.name});
      row.pass = r.pass;
      row.warnings = r.warnings;
      row.metrics = std::move(r.metrics);
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    table.rows.push_back(std::move(row));
  }

  if (write_outputs) {
    fs::create_directories(base.out_dir);
    table.csv_path = base.out_dir / (base.name + "_sweep_" + canon + ".csv");
    std::ofstream csv(table.csv_path, std::ios::binary);
    csv << canon
        << ",status,verdict,warnings,y_tail_max_abs,y_tail_rms,"
           "spikes_w_tail,spikes_y_tail\n";
    for (const auto& row : table.rows) {
      std::string warnings;
      for (const auto& w : row.warnings) {
        warnings += (warnings.empty() ? "" : "; ") + w;
      }
      const bool ok = row.status == "ok";
      csv << format_number(row.value) << ',' << csv_cell(row.status) << ','
          << (ok ? (row.pass ? "pass" : "fail") : "") << ','
          << csv_cell(warnings) << ','
          << lookup_number(row.metrics, "/steady_state_error/max_abs") << ','
          << lookup_number(row.metrics, "/steady_state_error/rms") << ','
          << lookup_number(row.metrics, "/spike_counts/w/tail") << ','
          << lookup_number(row.metrics, "/spike_counts/y/tail") << '\n';
    }
  }
  return table;
}

}  // namespace eventreg::scenario
