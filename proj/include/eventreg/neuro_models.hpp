#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eventreg/dynamics.hpp"

namespace eventreg::neuro {

/// Gain and time constant of one FitzHugh-Nagumo neuron.
struct FNParams {
  double k = 0.0;
  double tau = 0.0;
};

/// Parameters of one role in the loop. The tag keeps exosystem, plant,
/// controller and reference tuples from being swapped by accident.
template <typename Tag>
struct RoleParams {
  double k = 0.0;
  double tau = 0.0;

  FNParams fn() const { return {k, tau}; }
};

using ExoParams = RoleParams<struct ExoTag>;
using PlantParams = RoleParams<struct PlantTag>;
using CtrlParams = RoleParams<struct CtrlTag>;
using RefParams = RoleParams<struct RefTag>;

enum class Synapse { kExcitatory = 1, kInhibitory = -1 };

struct SynapticTerm {
  Synapse sign;
  double z;
};

/// Presynaptic voltages entering one gap junction.
struct SynapticInput {
  std::vector<SynapticTerm> terms;

  double sum() const;
};

/// x1' = x1 - x1^3/3 - x2 + k (synaptic_sum - y_self), x2' = tau (x1 - x2).
Eigen::Vector2d fn_rhs(const Eigen::Vector2d& x, const FNParams& p,
                       double synaptic_sum, double y_self);
Eigen::Vector2d fn_rhs(const Eigen::Vector2d& x, const FNParams& p,
                       const SynapticInput& input, double y_self);

/// Two mutually inhibiting neurons; w = x(0).
Eigen::Vector4d exo_rhs(const Eigen::Vector4d& x, const ExoParams& p);

/// Driven by w (excitatory) and u (inhibitory).
Eigen::Vector2d plant_rhs(const Eigen::Vector2d& x, const PlantParams& p,
                          double w, double u);

struct ControllerStep {
  Eigen::Vector4d dx;
  double u;
};

/// Copy of the exosystem with neuron 1 driven by `y`; u = x(0).
ControllerStep controller_rhs(const Eigen::Vector4d& x, const CtrlParams& p,
                              double y);

/// Parallel copy of the unperturbed plant driven by v.
Eigen::Vector2d reference_rhs(const Eigen::Vector2d& x, const RefParams& p,
                              double v);

struct SingleNeuronStep {
  Eigen::Vector2d dx;
  double u;
};

/// One-neuron internal-model candidate. Its self-coupling makes it contract
/// to rest when y = 0, so it cannot reproduce w.
SingleNeuronStep single_neuron_rhs(const Eigen::Vector2d& x, double k_w,
                                   double tau, double y);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Controller is driven by y (rejection) or by e = y - y_r (open system).
enum class LoopMode { kRejection, kOpenSystem };
enum class ControllerKind { kTwoNeuron, kSingleNeuron };

struct ClosedLoopConfig {
  ExoParams exo{2.0, 1.0 / 12.0};
  PlantParams plant{1.0, 1.0 / 11.0};
  CtrlParams ctrl{2.0, 1.0 / 12.0};
  std::optional<RefParams> ref;
  std::optional<Signal> v;

  LoopMode mode = LoopMode::kRejection;
  ControllerKind controller = ControllerKind::kTwoNeuron;
  /// When false the plant sees w = 0; the exosystem still evolves.
  bool disturbance_enabled = true;

  Eigen::Vector4d exo0{0.5, 0.0, -0.5, 0.0};
  Eigen::Vector2d plant0 = Eigen::Vector2d::Zero();
  /// A single-neuron controller uses the first two entries.
  Eigen::Vector4d ctrl0 = Eigen::Vector4d::Zero();
  Eigen::Vector2d ref0 = Eigen::Vector2d::Zero();

  /// Throws ConfigError on inconsistent settings; returns warnings for
  /// values outside the regime where convergence is guaranteed.
  std::vector<std::string> validate() const;
};

/// Augmented autonomous closed loop plus what is needed to integrate it.
/// State layout (labels):
///   x_w1..x_w4 | x_p1 x_p2 | x_eta1..x_eta4 (or x_eta1 x_eta2) | [x_r1 x_r2]
struct ClosedLoop {
  VectorField field;
  Eigen::VectorXd initial_state;
  InputSignals inputs;  ///< "v" in open-system mode
  ClosedLoopConfig config;
};

ClosedLoop assemble_closed_loop(const ClosedLoopConfig& cfg);

/// Outputs w, u, y and, in open-system mode, y_r and e along a trajectory.
struct LoopSignals {
  std::vector<double> w, u, y, y_r, e, v;
};
LoopSignals loop_signals(const Trajectory& traj, const ClosedLoop& loop);

/// Derived CSV columns: w, u, y[, y_r, e].
std::vector<DerivedColumn> derived_columns(const LoopSignals& sig,
                                           LoopMode mode);

/// Exosystem alone (labels x_w1..x_w4).
VectorField exosystem_field(const ExoParams& p);

/// A single FN neuron with gain `k` fed by an uncoupled (k = 0) FN neuron of
/// the same tau. Labels: x_s1 x_s2 (source, z = x_s1) x_1 x_2 (driven).
VectorField pass_all_field(double k, double tau);

/// One FN neuron with synaptic input "z" read from InputSignals.
VectorField driven_fn_field(const FNParams& p);

}  // namespace eventreg::neuro
