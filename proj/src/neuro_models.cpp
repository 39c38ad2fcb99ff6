#include "eventreg/neuro_models.hpp"

#include <cmath>

namespace eventreg::neuro {

double SynapticInput::sum() const {
  double s = 0.0;
  for (const auto& term : terms) s += static_cast<int>(term.sign) * term.z;
  return s;
}

Eigen::Vector2d fn_rhs(const Eigen::Vector2d& x, const FNParams& p,
                       double synaptic_sum, double y_self) {
  const double x1 = x(0), x2 = x(1);
  return {x1 - x1 * x1 * x1 / 3.0 - x2 + p.k * (synaptic_sum - y_self),
          p.tau * (x1 - x2)};
}

Eigen::Vector2d fn_rhs(const Eigen::Vector2d& x, const FNParams& p,
                       const SynapticInput& input, double y_self) {
  return fn_rhs(x, p, input.sum(), y_self);
}

Eigen::Vector4d exo_rhs(const Eigen::Vector4d& x, const ExoParams& p) {
  const double y1 = x(0), y2 = x(2);
  Eigen::Vector4d dx;
  dx.head<2>() = fn_rhs(x.head<2>(), p.fn(), -y2, y1);
  dx.tail<2>() = fn_rhs(x.tail<2>(), p.fn(), -y1, y2);
  return dx;
}

Eigen::Vector2d plant_rhs(const Eigen::Vector2d& x, const PlantParams& p,
                          double w, double u) {
  return fn_rhs(x, p.fn(), w - u, x(0));
}

ControllerStep controller_rhs(const Eigen::Vector4d& x, const CtrlParams& p,
                              double y) {
  const double y1 = x(0), y2 = x(2);
  ControllerStep step;
  step.dx.head<2>() = fn_rhs(x.head<2>(), p.fn(), y - y2, y1);
  step.dx.tail<2>() = fn_rhs(x.tail<2>(), p.fn(), -y1, y2);
  step.u = y1;
  return step;
}

Eigen::Vector2d reference_rhs(const Eigen::Vector2d& x, const RefParams& p,
                              double v) {
  return fn_rhs(x, p.fn(), v, x(0));
}

SingleNeuronStep single_neuron_rhs(const Eigen::Vector2d& x, double k_w,
                                   double tau, double y) {
  return {fn_rhs(x, FNParams{k_w, tau}, y, x(0)), x(0)};
}

namespace {

template <typename P>
void require_positive(const P& p, const char* role) {
  if (!(p.k > 0) || !(p.tau > 0) || !std::isfinite(p.k) ||
      !std::isfinite(p.tau)) {
    throw ConfigError(std::string(role) + ": k and tau must be finite and > 0");
  }
}

const std::vector<std::string> kExoLabels = {"x_w1", "x_w2", "x_w3", "x_w4"};

}  // namespace

std::vector<std::string> ClosedLoopConfig::validate() const {
  require_positive(exo, "exo");
  require_positive(plant, "plant");
  require_positive(ctrl, "ctrl");
  if (mode == LoopMode::kOpenSystem) {
    if (!ref || !v) {
      throw ConfigError("open-system mode requires a reference and input v");
    }
    require_positive(*ref, "ref");
  } else if (ref) {
    throw ConfigError("a reference system is only used in open-system mode");
  }
  if (!exo0.allFinite() || !plant0.allFinite() || !ctrl0.allFinite() ||
      !ref0.allFinite()) {
    throw ConfigError("initial conditions must be finite");
  }

  std::vector<std::string> warnings;
  if (exo.k <= 0.5) {
    warnings.push_back("exo.k <= 1/2: antiphase oscillation not guaranteed");
  }
  if (plant.k <= 1.0) {
    warnings.push_back("plant.k <= 1: plant convergence not guaranteed");
  }
  if (ref && ref->k <= 1.0) {
    warnings.push_back("ref.k <= 1: reference convergence not guaranteed");
  }
  return warnings;
}

ClosedLoop assemble_closed_loop(const ClosedLoopConfig& cfg) {
  cfg.validate();

  const bool single = cfg.controller == ControllerKind::kSingleNeuron;
  const bool open = cfg.mode == LoopMode::kOpenSystem;
  const Eigen::Index n_ctrl = single ? 2 : 4;
  const Eigen::Index i_plant = 4, i_ctrl = 6, i_ref = 6 + n_ctrl;
  const Eigen::Index dim = i_ref + (open ? 2 : 0);

  std::vector<std::string> labels = kExoLabels;
  labels.insert(labels.end(), {"x_p1", "x_p2", "x_eta1", "x_eta2"});
  if (!single) labels.insert(labels.end(), {"x_eta3", "x_eta4"});
  if (open) labels.insert(labels.end(), {"x_r1", "x_r2"});

  const ExoParams exo = cfg.exo;
  const PlantParams plant = cfg.plant;
  const CtrlParams ctrl = cfg.ctrl;
  const RefParams ref = cfg.ref.value_or(RefParams{});
  const bool disturbance = cfg.disturbance_enabled;

  auto rhs = [=](double t, const Eigen::VectorXd& x,
                 const InputSignals& inputs) -> Eigen::VectorXd {
    Eigen::VectorXd dx(dim);
    dx.head<4>() = exo_rhs(x.head<4>(), exo);

    const double w = disturbance ? x(0) : 0.0;
    const double u = x(i_ctrl);
    const double y = x(i_plant);
    double drive = y;
    double v = 0.0;
    if (open) {
      v = inputs("v", t);
      drive = y - x(i_ref);
      dx.segment<2>(i_ref) = reference_rhs(x.segment<2>(i_ref), ref, v);
    }
    dx.segment<2>(i_plant) =
        fn_rhs(x.segment<2>(i_plant), plant.fn(), w - u + v, y);
    if (single) {
      dx.segment<2>(i_ctrl) =
          single_neuron_rhs(x.segment<2>(i_ctrl), ctrl.k, ctrl.tau, drive).dx;
    } else {
      dx.segment<4>(i_ctrl) =
          controller_rhs(x.segment<4>(i_ctrl), ctrl, drive).dx;
    }
    return dx;
  };

  ClosedLoop loop{VectorField(std::move(labels), rhs), Eigen::VectorXd(dim),
                  InputSignals{}, cfg};
  loop.initial_state.head<4>() = cfg.exo0;
  loop.initial_state.segment<2>(i_plant) = cfg.plant0;
  loop.initial_state.segment(i_ctrl, n_ctrl) = cfg.ctrl0.head(n_ctrl);
  if (open) {
    loop.initial_state.segment<2>(i_ref) = cfg.ref0;
    loop.inputs.set("v", *cfg.v);
  }
  return loop;
}

LoopSignals loop_signals(const Trajectory& traj, const ClosedLoop& loop) {
  const auto& cfg = loop.config;
  const bool open = cfg.mode == LoopMode::kOpenSystem;
  const std::size_t iw = traj.label_index("x_w1");
  const std::size_t ip = traj.label_index("x_p1");
  const std::size_t ic = traj.label_index("x_eta1");
  const std::size_t ir = open ? traj.label_index("x_r1") : 0;

  LoopSignals sig;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    auto s = traj.state(i);
    sig.w.push_back(cfg.disturbance_enabled ? s[iw] : 0.0);
    sig.u.push_back(s[ic]);
    sig.y.push_back(s[ip]);
    if (open) {
      sig.y_r.push_back(s[ir]);
      sig.e.push_back(s[ip] - s[ir]);
      sig.v.push_back(loop.inputs("v", traj.times()[i]));
    }
  }
  return sig;
}

std::vector<DerivedColumn> derived_columns(const LoopSignals& sig,
                                           LoopMode mode) {
  std::vector<DerivedColumn> cols = {{"w", sig.w}, {"u", sig.u}, {"y", sig.y}};
  if (mode == LoopMode::kOpenSystem) {
    cols.push_back({"y_r", sig.y_r});
    cols.push_back({"e", sig.e});
  }
  return cols;
}

VectorField exosystem_field(const ExoParams& p) {
  return VectorField(kExoLabels, [p](double, const Eigen::VectorXd& x,
                                     const InputSignals&) -> Eigen::VectorXd {
    return exo_rhs(x.head<4>(), p);
  });
}

VectorField pass_all_field(double k, double tau) {
  const FNParams source{0.0, tau};
  const FNParams driven{k, tau};
  return VectorField(
      {"x_s1", "x_s2", "x_1", "x_2"},
      [=](double, const Eigen::VectorXd& x,
          const InputSignals&) -> Eigen::VectorXd {
        Eigen::VectorXd dx(4);
        dx.head<2>() = fn_rhs(x.head<2>(), source, 0.0, 0.0);
        dx.tail<2>() = fn_rhs(x.tail<2>(), driven, x(0), x(2));
        return dx;
      });
}

VectorField driven_fn_field(const FNParams& p) {
  return VectorField({"x_1", "x_2"},
                     [p](double t, const Eigen::VectorXd& x,
                         const InputSignals& inputs) -> Eigen::VectorXd {
                       const double z = inputs.contains("z") ? inputs("z", t)
                                                             : 0.0;
                       return fn_rhs(x.head<2>(), p, z, x(0));
                     });
}

}  // namespace eventreg::neuro
