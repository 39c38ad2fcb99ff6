#include "eventreg/event_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace eventreg::analysis {

std::size_t SpikeTrain::count_in(double from, double to) const {
  return static_cast<std::size_t>(
      std::count_if(times.begin(), times.end(),
                    [&](double t) { return t >= from && t <= to; }));
}

SpikeTrain detect_spikes(std::span<const double> times,
                         std::span<const double> signal, double threshold,
                         double refractory) {
  if (signal.empty()) throw AnalysisError("detect_spikes: empty series");
  if (times.size() != signal.size()) {
    throw AnalysisError("detect_spikes: times and signal differ in length");
  }
  if (refractory < 0) throw AnalysisError("detect_spikes: refractory < 0");

  SpikeTrain train;
  train.threshold = threshold;
  train.refractory = refractory;
  for (std::size_t i = 0; i + 1 < signal.size(); ++i) {
    const double a = signal[i], b = signal[i + 1];
    if (!(a < threshold && b >= threshold)) continue;
    const double t =
        times[i] + (threshold - a) / (b - a) * (times[i + 1] - times[i]);
    if (!train.times.empty() && t - train.times.back() < refractory) continue;
    train.times.push_back(t);
  }
  return train;
}

ContractionCertificate contraction_bound(const neuro::FNParams& p) {
  ContractionCertificate cert;
  cert.k = p.k;
  cert.tau = p.tau;
  cert.metric_diag = {1.0, 1.0 / p.tau};
  // P Df + Df^T P = diag(2(1 - k - x1^2), -2); the x1^2 term only helps.
  cert.bound_max_eig = 2.0 * std::max(1.0 - p.k, -1.0);
  cert.convergent = cert.bound_max_eig < 0.0;

  const VectorField field = neuro::driven_fn_field(p);
  const InputSignals inputs = InputSignals::frozen({{"z", 0.0}});
  const Eigen::Matrix2d metric = cert.metric_diag.asDiagonal();
  cert.sampled_max_eig = -std::numeric_limits<double>::infinity();
  constexpr int kSamples = 601;
  for (int i = 0; i < kSamples; ++i) {
    const double x1 = -3.0 + 6.0 * i / (kSamples - 1);
    const Eigen::Matrix2d jac =
        jacobian_fd(field, Eigen::Vector2d(x1, 0.0), inputs, 1e-5);
    const Eigen::Matrix2d sym = metric * jac + jac.transpose() * metric;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(sym,
                                                          Eigen::EigenvaluesOnly);
    cert.sampled_max_eig =
        std::max(cert.sampled_max_eig, solver.eigenvalues().maxCoeff());
  }
  if (cert.sampled_max_eig > cert.bound_max_eig + 1e-6) {
    throw std::logic_error(
        "contraction_bound: sampled weighted Jacobian exceeds analytic bound");
  }
  return cert;
}

ConvergenceReport convergence_test(
    const VectorField& field,
    const std::vector<Eigen::VectorXd>& initial_conditions,
    const InputSignals& inputs, const ConvergenceOptions& opts) {
  const std::size_t n = initial_conditions.size();
  if (n < 2) {
    throw AnalysisError("convergence_test: need at least 2 initial conditions");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((initial_conditions[i] - initial_conditions[j]).norm() < 0.1) {
        throw AnalysisError(
            "convergence_test: initial conditions closer than 0.1");
      }
    }
  }

  // Keep only the tail of each run; full trajectories are large.
  std::vector<Eigen::MatrixXd> tails;
  tails.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Trajectory traj = integrate(field, initial_conditions[k], opts.t0,
                                      opts.t_final, opts.dt, inputs);
    if (opts.observer) opts.observer(k, traj);
    const std::size_t begin = traj.tail_begin(opts.tail_fraction);
    Eigen::MatrixXd tail(static_cast<Eigen::Index>(traj.dimension()),
                         static_cast<Eigen::Index>(traj.size() - begin));
    for (std::size_t i = begin; i < traj.size(); ++i) {
      tail.col(static_cast<Eigen::Index>(i - begin)) = traj.state_vector(i);
    }
    tails.push_back(std::move(tail));
  }

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      worst = std::max(worst, (tails[i] - tails[j]).colwise().norm().maxCoeff());
    }
  }
  return {n, worst, worst < opts.tolerance, opts.tolerance};
}

AntiphaseReport antiphase_metric(const Trajectory& exo_traj,
                                 double tail_fraction) {
  if (!exo_traj.has_label("x_w1") || !exo_traj.has_label("x_w3")) {
    throw AnalysisError("antiphase_metric: trajectory lacks x_w1/x_w3");
  }
  const std::size_t i1 = exo_traj.label_index("x_w1");
  const std::size_t i3 = exo_traj.label_index("x_w3");
  const std::size_t begin = exo_traj.tail_begin(tail_fraction);
  if (begin >= exo_traj.size()) {
    throw AnalysisError("antiphase_metric: empty tail window");
  }

  double metric = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = begin; i < exo_traj.size(); ++i) {
    auto s = exo_traj.state(i);
    metric = std::max(metric, std::abs(s[i1] + s[i3]));
    lo = std::min(lo, s[i1]);
    hi = std::max(hi, s[i1]);
  }
  return {metric, 0.5 * (hi - lo)};
}

SteadyStateError steady_state_error(std::span<const double> y,
                                    double tail_fraction) {
  if (y.empty()) return {0.0, 0.0};
  const auto n = y.size();
  const double keep = std::clamp(tail_fraction, 0.0, 1.0) * static_cast<double>(n);
  const std::size_t begin =
      n - std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(keep)));
  double max_abs = 0.0, sum_sq = 0.0;
  for (std::size_t i = begin; i < n; ++i) {
    max_abs = std::max(max_abs, std::abs(y[i]));
    sum_sq += y[i] * y[i];
  }
  return {max_abs, std::sqrt(sum_sq / static_cast<double>(n - begin))};
}

PatternMatch spike_pattern_match(const SpikeTrain& a, const SpikeTrain& b,
                                 double jitter_tol) {
  PatternMatch result{a.size() == b.size(), {}};
  if (!result.matched) return result;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double offset = b.times[i] - a.times[i];
    result.offsets.push_back(offset);
    if (std::abs(offset) >= jitter_tol) result.matched = false;
  }
  return result;
}

}  // namespace eventreg::analysis
