#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "eventreg/dynamics.hpp"
#include "eventreg/neuro_models.hpp"

namespace eventreg::analysis {

class AnalysisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Spike (event) times of one output signal.
struct SpikeTrain {
  std::vector<double> times;
  double threshold = 1.0;
  double refractory = 5.0;

  std::size_t size() const { return times.size(); }
  /// Number of spikes with from <= t <= to.
  std::size_t count_in(double from, double to) const;
};

/// One spike per upward threshold crossing, interpolated linearly between
/// samples. Crossings closer than `refractory` to the previous spike are
/// dropped.
SpikeTrain detect_spikes(std::span<const double> times,
                         std::span<const double> signal, double threshold = 1.0,
                         double refractory = 5.0);

/// Weighted-Jacobian bound for one FN neuron with metric P = diag(1, 1/tau).
struct ContractionCertificate {
  double k;
  double tau;
  Eigen::Vector2d metric_diag;
  /// max over x of lambda_max(P Df(x) + Df(x)^T P), attained at x1 = 0.
  double bound_max_eig;
  /// Same quantity sampled with finite differences over x1 in [-3, 3].
  double sampled_max_eig;
  bool convergent;
};

/// Throws std::logic_error if the sampled maximum exceeds the analytic
/// bound by more than 1e-6.
ContractionCertificate contraction_bound(const neuro::FNParams& p);

/// Evidence (not a proof) that trajectories from different initial
/// conditions approach each other under the given inputs.
struct ConvergenceReport {
  std::size_t n_initial_conditions;
  double tail_pairwise_max_distance;
  bool converged;
  double tolerance;
};

struct ConvergenceOptions {
  double t0 = 0.0;
  double t_final = 500.0;
  double dt = 1e-3;
  double tail_fraction = 0.4;
  double tolerance = 1e-2;
  /// Called with (initial condition index, full trajectory) after each run.
  std::function<void(std::size_t, const Trajectory&)> observer;
};

ConvergenceReport convergence_test(
    const VectorField& field,
    const std::vector<Eigen::VectorXd>& initial_conditions,
    const InputSignals& inputs, const ConvergenceOptions& opts);

struct AntiphaseReport {
  double metric;     ///< tail max |y_w1 + y_w2|
  double amplitude;  ///< half the tail peak-to-peak of y_w1
};

/// Requires labels x_w1 and x_w3.
AntiphaseReport antiphase_metric(const Trajectory& exo_traj,
                                 double tail_fraction = 0.4);

struct SteadyStateError {
  double max_abs;
  double rms;
};

/// Tail statistics over the last `tail_fraction` of the samples.
SteadyStateError steady_state_error(std::span<const double> y,
                                    double tail_fraction = 0.4);

struct PatternMatch {
  bool matched;
  std::vector<double> offsets;  ///< b_i - a_i for each paired spike
};

PatternMatch spike_pattern_match(const SpikeTrain& a, const SpikeTrain& b,
                                 double jitter_tol);

}  // namespace eventreg::analysis
