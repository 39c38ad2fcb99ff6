#include <complex>
#include <random>

#include "doctest.h"
#include "eventreg/event_analysis.hpp"
#include "eventreg/linear_motif.hpp"

using namespace eventreg;
using namespace eventreg::linear;

namespace {

ControllerParams with_gains(double k1, double k2, double omega = 1.0) {
  ControllerParams p = default_controller(omega);
  p.k_eta << k1, k2;
  return p;
}

// Steady-state response to w = cos t is Re(H(j) e^{jt}) with
// H(s) = (sI - A)^{-1} B; with x_W = (cos t, -sin t) that is
// Pi = [Re H(j), Im H(j)]. Independent of the Kronecker solve.
Matrix3x2d frequency_response_pi(const Eigen::Matrix3d& a, const Eigen::Vector3d& b) {
  const std::complex<double> j(0.0, 1.0);
  const Eigen::Matrix3cd lhs = j * Eigen::Matrix3cd::Identity() - a.cast<std::complex<double>>();
  const Eigen::Vector3cd h = lhs.partialPivLu().solve(b.cast<std::complex<double>>());
  Matrix3x2d pi;
  pi.col(0) = h.real();
  pi.col(1) = h.imag();
  return pi;
}

}  // namespace

TEST_CASE("closed_loop_matrix block structure") {
  Eigen::Matrix3d expected;
  expected << -1, -1, -0.5, 1, 0, 1, 0, -1, 0;
  CHECK((closed_loop_matrix(with_gains(1, 0.5)) - expected).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::Matrix3d zero_gain = closed_loop_matrix(with_gains(0, 0));
  CHECK(zero_gain(0, 0) == -1.0);
  CHECK(zero_gain.block<2, 2>(1, 1) == exosystem_matrix());
  CHECK_FALSE(is_hurwitz(zero_gain).hurwitz);
}

TEST_CASE("is_hurwitz") {
  Eigen::Matrix2d diag;
  diag << -1, 0, 0, -2;
  auto r = is_hurwitz(diag);
  CHECK(r.hurwitz);
  CHECK(r.spectral_abscissa == doctest::Approx(-1.0));

  r = is_hurwitz(exosystem_matrix());
  CHECK_FALSE(r.hurwitz);
  CHECK(std::abs(r.spectral_abscissa) < 1e-12);

  r = is_hurwitz(closed_loop_matrix(with_gains(1, 0.5)));
  CHECK(r.hurwitz);
  CHECK(r.spectral_abscissa == doctest::Approx(-0.277880091).epsilon(1e-8));

  CHECK_THROWS_AS(is_hurwitz(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("gain region: K_eta1 > -K_eta2 and K_eta2 < 1") {
  CHECK(is_hurwitz(closed_loop_matrix(with_gains(1, 0.5))).hurwitz);
  CHECK_FALSE(is_hurwitz(closed_loop_matrix(with_gains(1, 1.5))).hurwitz);
  CHECK_FALSE(is_hurwitz(closed_loop_matrix(with_gains(-1, 0.5))).hurwitz);

  // Property: membership in the region matches the eigenvalue test away from
  // the boundary.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-3, 3);
  int checked = 0;
  for (int n = 0; n < 500; ++n) {
    const double k1 = dist(rng), k2 = dist(rng);
    const double margin = std::min(std::abs(k1 + k2), std::abs(1 - k2));
    if (margin < 0.05) continue;
    const bool inside = k1 > -k2 && k2 < 1;
    CHECK(is_hurwitz(closed_loop_matrix(with_gains(k1, k2))).hurwitz == inside);
    ++checked;
  }
  CHECK(checked > 400);
}

TEST_CASE("controller parameter validation") {
  CHECK_NOTHROW(default_controller().validate());
  CHECK(default_controller().embeds_unit_frequency());
  CHECK_NOTHROW(default_controller(2.0).validate());
  CHECK_FALSE(default_controller(2.0).embeds_unit_frequency());

  ControllerParams bad = default_controller();
  bad.phi << -1, 0, 0, -2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  ControllerParams uncontrollable = default_controller();
  uncontrollable.g.setZero();
  CHECK_THROWS_AS(uncontrollable.validate(), std::invalid_argument);
}

TEST_CASE("solve_francis") {
  const Eigen::Matrix2d s = exosystem_matrix();
  const Eigen::RowVector2d c_w = exosystem_output();

  SUBCASE("zero input gives zero solution") {
    const auto sol = solve_francis(closed_loop_matrix(with_gains(1, 0.5)),
                                   Eigen::Vector3d::Zero(), s, c_w);
    CHECK(sol.pi.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("matches frequency-response oracle") {
    const Eigen::Matrix3d a = closed_loop_matrix(with_gains(1, 0.5));
    const auto sol = solve_francis(a, disturbance_input(), s, c_w);
    CHECK(sol.residual < 1e-9);

    // Frozen from the frequency-response route.
    Matrix3x2d frozen;
    frozen << 0.0, 0.0, 0.8, -0.4, 0.4, 0.8;
    CHECK((sol.pi - frozen).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sol.pi - frequency_response_pi(a, disturbance_input())).cwiseAbs().maxCoeff() <
          1e-12);

    // Plant row vanishes: the steady state has y = 0, and u = K_eta x_eta
    // reproduces w.
    const Eigen::RowVector2d u_map = Eigen::RowVector2d(1, 0.5) * sol.pi.bottomRows<2>();
    CHECK((u_map - c_w).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("property: random Hurwitz loops agree with the oracle") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-2, 2);
    for (int n = 0; n < 100; ++n) {
      ControllerParams p = with_gains(dist(rng), dist(rng), 0.5 + std::abs(dist(rng)));
      p.k_y = dist(rng);
      const Eigen::Matrix3d a = closed_loop_matrix(p);
      if (!is_hurwitz(a).hurwitz) continue;
      const Eigen::Vector3d b(dist(rng), dist(rng), dist(rng));
      const auto sol = solve_francis(a, b, s, c_w);
      CHECK(sol.residual < 1e-9);
      CHECK((sol.pi - frequency_response_pi(a, b)).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  SUBCASE("shared eigenvalues have no unique solution") {
    CHECK_THROWS_AS(solve_francis(closed_loop_matrix(with_gains(0, 0)),
                                  disturbance_input(), s, c_w),
                    NoUniqueSolution);
  }
}

TEST_CASE("simulate_closed_loop") {
  const ControllerParams p = with_gains(1, 0.5);

  SUBCASE("unforced loop decays") {
    const auto traj = simulate_closed_loop(p, 1.0, Eigen::Vector2d(0.5, -0.5),
                                           Eigen::Vector2d::Zero(), 60, 1e-2);
    const auto y = traj.column("x");
    for (std::size_t i = traj.tail_begin(0.2); i < traj.size(); ++i) {
      CHECK(std::abs(y[i]) < 1e-5);
    }
  }

  SUBCASE("regulation and steady-state identity") {
    const auto traj = simulate_closed_loop(p, 0.0, Eigen::Vector2d::Zero(),
                                           Eigen::Vector2d(1, 0), 100, 1e-3);
    CHECK(traj.labels() ==
          std::vector<std::string>{"x", "x_eta1", "x_eta2", "x_W1", "x_W2"});
    const auto sig = linear_signals(traj, p);
    CHECK(analysis::steady_state_error(sig.y, 0.2).max_abs < 1e-3);

    const auto sol = solve_francis(closed_loop_matrix(p), disturbance_input(),
                                   exosystem_matrix(), exosystem_output());
    CHECK(steady_state_deviation(traj, sol.pi, 0.2) < 1e-3);

    // The controller output copies w on the tail.
    double worst = 0;
    for (std::size_t i = traj.tail_begin(0.2); i < traj.size(); ++i) {
      worst = std::max(worst, std::abs(sig.u[i] - sig.w[i]));
    }
    CHECK(worst < 1e-3);
  }

  SUBCASE("property: regulation from random initial states and gains") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ic(-2, 2);
    std::uniform_real_distribution<double> gain(-0.5, 0.5);
    int runs = 0;
    while (runs < 6) {
      const double k2 = gain(rng);
      const double k1 = -k2 + 0.5 + std::abs(gain(rng)) * 3;
      const ControllerParams q = with_gains(k1, k2);
      if (is_hurwitz(closed_loop_matrix(q)).spectral_abscissa > -0.2) continue;
      const auto traj = simulate_closed_loop(q, ic(rng), Eigen::Vector2d(ic(rng), ic(rng)),
                                             Eigen::Vector2d(ic(rng), ic(rng)), 100, 1e-2);
      CHECK(analysis::steady_state_error(traj.column("x"), 0.2).max_abs < 1e-3);
      ++runs;
    }
  }

  SUBCASE("wrong internal-model frequency leaves a residual") {
    const ControllerParams q = with_gains(1, 0.5, 2.0);
    REQUIRE(is_hurwitz(closed_loop_matrix(q)).hurwitz);
    const auto traj = simulate_closed_loop(q, 0.0, Eigen::Vector2d::Zero(),
                                           Eigen::Vector2d(1, 0), 100, 1e-3);
    CHECK(analysis::steady_state_error(traj.column("x"), 0.2).max_abs > 0.05);
  }

  SUBCASE("non-Hurwitz gains are rejected") {
    CHECK_THROWS_AS(simulate_closed_loop(with_gains(1, 1.5), 0, Eigen::Vector2d::Zero(),
                                         Eigen::Vector2d(1, 0), 10, 1e-2),
                    std::invalid_argument);
  }
}
