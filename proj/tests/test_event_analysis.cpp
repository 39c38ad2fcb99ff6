#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "eventreg/event_analysis.hpp"

using namespace eventreg;
using namespace eventreg::analysis;

namespace {

// Triangular bumps of height 2 whose rising edge crosses 1 exactly at each
// center c (peak at c + 0.5).
std::vector<double> bumps(const std::vector<double>& t, const std::vector<double>& centers) {
  std::vector<double> y(t.size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (double c : centers) {
      y[i] = std::max(y[i], 2.0 - 2.0 * std::abs(t[i] - (c + 0.5)));
    }
    y[i] = std::max(0.0, y[i]);
  }
  return y;
}

std::vector<double> grid(double t0, double t1, double dt) {
  std::vector<double> t;
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) t.push_back(t0 + static_cast<double>(i) * dt);
  return t;
}

SpikeTrain train(std::vector<double> times) {
  SpikeTrain s;
  s.times = std::move(times);
  return s;
}

}  // namespace

TEST_CASE("detect_spikes") {
  const auto t = grid(0, 20, 0.01);

  SUBCASE("one spike per bump at the interpolated crossing") {
    const auto s = detect_spikes(t, bumps(t, {2.0, 10.0}));
    REQUIRE(s.size() == 2);
    CHECK(s.times[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(s.times[1] == doctest::Approx(10.0).epsilon(1e-9));
  }

  SUBCASE("refractory period suppresses close crossings") {
    const auto y = bumps(t, {2.0, 4.0});
    CHECK(detect_spikes(t, y).size() == 1);
    CHECK(detect_spikes(t, y, 1.0, 1.0).size() == 2);
  }

  SUBCASE("subthreshold oscillation has no spikes") {
    std::vector<double> y(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) y[i] = 0.5 * std::sin(t[i]);
    CHECK(detect_spikes(t, y).size() == 0);
  }

  SUBCASE("a signal starting above threshold is not a crossing") {
    std::vector<double> y(t.size(), 1.5);
    CHECK(detect_spikes(t, y).size() == 0);
  }

  SUBCASE("property: spike count never exceeds upward crossings") {
    std::mt19937 rng(9);
    std::normal_distribution<double> noise(0.0, 0.6);
    for (int n = 0; n < 30; ++n) {
      std::vector<double> y(t.size());
      for (auto& v : y) v = 1.0 + noise(rng);
      const auto s = detect_spikes(t, y, 1.0, 0.5);
      std::size_t crossings = 0;
      for (std::size_t i = 0; i + 1 < y.size(); ++i) crossings += y[i] < 1.0 && y[i + 1] >= 1.0;
      CHECK(s.size() <= crossings);
      for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.times[i] - s.times[i - 1] >= 0.5);
    }
  }

  SUBCASE("errors") {
    const std::vector<double> empty;
    CHECK_THROWS_AS(detect_spikes(empty, empty), AnalysisError);
    CHECK_THROWS_AS(detect_spikes(t, std::vector<double>(3, 0.0)), AnalysisError);
  }

  SUBCASE("count_in is inclusive") {
    const auto s = train({1.0, 2.0, 3.0});
    CHECK(s.count_in(1.0, 2.0) == 2);
    CHECK(s.count_in(2.5, 10.0) == 1);
  }
}

TEST_CASE("contraction_bound") {
  struct Case {
    double k, bound;
    bool convergent;
  };
  for (const Case c : {Case{0.5, 1.0, false}, Case{1.0, 0.0, false}, Case{1.1, -0.2, true},
                       Case{2.0, -2.0, true}, Case{5.0, -2.0, true}}) {
    CAPTURE(c.k);
    const auto cert = contraction_bound({c.k, 1.0 / 12});
    CHECK(cert.bound_max_eig == doctest::Approx(c.bound));
    CHECK(cert.convergent == c.convergent);
    CHECK(cert.metric_diag(1) == doctest::Approx(12.0));
    // The bound is attained at x1 = 0, which is on the sampling grid.
    CHECK(cert.sampled_max_eig == doctest::Approx(c.bound).epsilon(1e-6));
  }
}

TEST_CASE("convergence_test") {
  ConvergenceOptions opts;
  opts.t_final = 60;
  opts.dt = 1e-2;
  opts.tolerance = 1e-3;

  SUBCASE("linear decay") {
    VectorField f({"x"}, [](double, const Eigen::VectorXd& x,
                            const InputSignals&) -> Eigen::VectorXd { return -x; });
    std::vector<Eigen::VectorXd> ics = {Eigen::VectorXd::Constant(1, 1.0),
                                        Eigen::VectorXd::Constant(1, -3.0)};
    std::size_t observed = 0;
    opts.observer = [&](std::size_t, const Trajectory&) { ++observed; };
    const auto r = convergence_test(f, ics, {}, opts);
    CHECK(r.converged);
    CHECK(r.n_initial_conditions == 2);
    CHECK(observed == 2);
  }

  SUBCASE("driven FN neuron with k = 2 forgets its initial state") {
    InputSignals in;
    in.set("z", [](double t) { return 1.5 * std::sin(0.2 * t); });
    // The certified Euclidean rate is only 1/24, so give it time.
    opts.t_final = 400;
    const auto r = convergence_test(
        neuro::driven_fn_field({2.0, 1.0 / 12}),
        {Eigen::Vector2d(2, 1), Eigen::Vector2d(-2, -1), Eigen::Vector2d(0, 0.5)}, in, opts);
    CHECK(r.converged);
    CHECK(r.tail_pairwise_max_distance < 1e-3);
  }

  SUBCASE("uncoupled FN oscillators keep their phase difference") {
    const auto r = convergence_test(neuro::driven_fn_field({0.0, 1.0 / 12}),
                                    {Eigen::Vector2d(2, 0), Eigen::Vector2d(-1, 0.5)}, {},
                                    opts);
    CHECK_FALSE(r.converged);
  }

  SUBCASE("rejects too few or coincident initial conditions") {
    const auto f = neuro::driven_fn_field({2.0, 0.1});
    CHECK_THROWS_AS(convergence_test(f, {Eigen::Vector2d(0, 0)}, {}, opts), AnalysisError);
    CHECK_THROWS_AS(
        convergence_test(f, {Eigen::Vector2d(0, 0), Eigen::Vector2d(0.05, 0)}, {}, opts),
        AnalysisError);
  }
}

TEST_CASE("antiphase_metric") {
  SUBCASE("exact antiphase signal") {
    Trajectory traj({"x_w1", "x_w2", "x_w3", "x_w4"}, 0.0, 0.01);
    for (int i = 0; i <= 2000; ++i) {
      const double s = 1.7 * std::sin(0.01 * i);
      traj.push_back(Eigen::Vector4d(s, 0, -s, 0));
    }
    const auto r = antiphase_metric(traj);
    CHECK(r.metric == 0.0);
    CHECK(r.amplitude == doctest::Approx(1.7).epsilon(1e-3));
  }

  SUBCASE("exosystem settles into antiphase from a generic state") {
    const auto traj = integrate(neuro::exosystem_field({2.0, 1.0 / 12}),
                                Eigen::Vector4d(1, 0.2, -0.3, 0), 0, 300, 1e-3);
    const auto r = antiphase_metric(traj);
    CHECK(r.metric < 1e-2);
    CHECK(r.amplitude > 1.0);
  }

  SUBCASE("symmetric state decays instead of oscillating") {
    const auto traj = integrate(neuro::exosystem_field({2.0, 1.0 / 12}),
                                Eigen::Vector4d(0.5, 0, 0.5, 0), 0, 100, 1e-2);
    CHECK(antiphase_metric(traj).amplitude < 1e-3);
  }

  SUBCASE("missing labels") {
    Trajectory traj({"a"}, 0, 1);
    traj.push_back(Eigen::VectorXd::Zero(1));
    CHECK_THROWS_AS(antiphase_metric(traj), AnalysisError);
  }
}

TEST_CASE("steady_state_error") {
  std::vector<double> y(10000);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = 0.1 * std::sin(2 * std::numbers::pi * static_cast<double>(i) / 100.0);
  }
  const auto e = steady_state_error(y, 0.4);
  CHECK(e.max_abs == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(e.rms == doctest::Approx(0.1 / std::sqrt(2.0)).epsilon(1e-6));

  std::vector<double> step(100, 5.0);
  std::fill(step.begin() + 60, step.end(), 0.0);
  CHECK(steady_state_error(step, 0.4).max_abs == 0.0);
  CHECK(steady_state_error(step, 0.41).max_abs == 5.0);
}

TEST_CASE("spike_pattern_match") {
  const auto a = train({1.0, 10.0, 20.0});
  CHECK(spike_pattern_match(a, train({1.5, 10.2, 19.9}), 2.0).matched);
  CHECK_FALSE(spike_pattern_match(a, train({1.5, 13.0, 19.9}), 2.0).matched);
  CHECK_FALSE(spike_pattern_match(a, train({1.5, 10.2}), 2.0).matched);

  const auto m = spike_pattern_match(a, train({1.5, 10.2, 19.9}), 2.0);
  REQUIRE(m.offsets.size() == 3);
  CHECK(m.offsets[0] == doctest::Approx(0.5));
  CHECK(m.offsets[2] == doctest::Approx(-0.1));

  CHECK(spike_pattern_match(train({}), train({}), 1.0).matched);
}
