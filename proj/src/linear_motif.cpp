#include "eventreg/linear_motif.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace eventreg::linear {

Eigen::Matrix2d exosystem_matrix() {
  Eigen::Matrix2d s;
  s << 0, 1, -1, 0;
  return s;
}

Eigen::RowVector2d exosystem_output() { return {1.0, 0.0}; }

namespace {

constexpr double kEigTol = 1e-9;

Eigen::Vector2cd eigenvalues(const Eigen::Matrix2d& m) {
  Eigen::EigenSolver<Eigen::Matrix2d> solver(m, false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigensolver failed");
  }
  return solver.eigenvalues();
}

}  // namespace

void ControllerParams::validate() const {
  const Eigen::Vector2cd ev = eigenvalues(phi);
  for (Eigen::Index i = 0; i < 2; ++i) {
    if (std::abs(ev(i).real()) > kEigTol || std::abs(ev(i).imag()) < kEigTol) {
      throw std::invalid_argument(
          "ControllerParams: Phi must have a purely imaginary eigenvalue pair");
    }
  }
  Eigen::Matrix2d ctrb;
  ctrb << g, phi * g;
  if (Eigen::FullPivLU<Eigen::Matrix2d>(ctrb).rank() != 2) {
    throw std::invalid_argument("ControllerParams: (Phi, G) not controllable");
  }
  if (!k_eta.allFinite() || !std::isfinite(k_y)) {
    throw std::invalid_argument("ControllerParams: non-finite gain");
  }
}

bool ControllerParams::embeds_unit_frequency() const {
  const Eigen::Vector2cd ev = eigenvalues(phi);
  for (Eigen::Index i = 0; i < 2; ++i) {
    if (std::abs(ev(i).real()) > kEigTol ||
        std::abs(std::abs(ev(i).imag()) - 1.0) > kEigTol) {
      return false;
    }
  }
  return true;
}

ControllerParams default_controller(double omega) {
  ControllerParams p;
  p.phi << 0, omega, -omega, 0;
  p.g << 1, 0;
  p.k_y = 0.0;
  p.k_eta << 1.0, 0.5;
  return p;
}

Eigen::Matrix3d closed_loop_matrix(const ControllerParams& params) {
  Eigen::Matrix3d a;
  a(0, 0) = -params.k_y - 1.0;
  a.block<1, 2>(0, 1) = -params.k_eta;
  a.block<2, 1>(1, 0) = params.g;
  a.block<2, 2>(1, 1) = params.phi;
  return a;
}

Eigen::Vector3d disturbance_input() { return {1.0, 0.0, 0.0}; }

HurwitzResult is_hurwitz(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument("is_hurwitz: matrix must be square");
  }
  if (!m.allFinite()) throw std::invalid_argument("is_hurwitz: non-finite");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("is_hurwitz: eigensolver failed");
  }
  const double abscissa = solver.eigenvalues().real().maxCoeff();
  return {abscissa < -kEigTol, abscissa};
}

FrancisSolution solve_francis(const Eigen::Matrix3d& a_cl,
                              const Eigen::Vector3d& b_cl,
                              const Eigen::Matrix2d& s,
                              const Eigen::RowVector2d& c_w) {
  // Column-major vec: vec(Pi S) = (S^T (x) I3) vec(Pi),
  // vec(A Pi) = (I2 (x) A) vec(Pi).
  Eigen::Matrix<double, 6, 6> lhs = Eigen::Matrix<double, 6, 6>::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      lhs.block<3, 3>(3 * i, 3 * j) += s(j, i) * Eigen::Matrix3d::Identity();
    }
    lhs.block<3, 3>(3 * i, 3 * i) -= a_cl;
  }
  const Eigen::Matrix<double, 3, 2> rhs_mat = b_cl * c_w;
  const Eigen::Matrix<double, 6, 1> rhs =
      Eigen::Map<const Eigen::Matrix<double, 6, 1>>(rhs_mat.data());

  Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(lhs);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw NoUniqueSolution(
        "solve_francis: A_cl and S share an eigenvalue, no unique solution");
  }
  const Eigen::Matrix<double, 6, 1> vec_pi = lu.solve(rhs);

  FrancisSolution sol;
  sol.pi = Eigen::Map<const Matrix3x2d>(vec_pi.data());
  sol.residual = (sol.pi * s - a_cl * sol.pi - b_cl * c_w).cwiseAbs().maxCoeff();
  return sol;
}

VectorField closed_loop_field(const ControllerParams& params) {
  const Eigen::Matrix3d a_cl = closed_loop_matrix(params);
  const Eigen::Matrix2d s = exosystem_matrix();
  // Augmented autonomous system: [x_cl; x_W].
  Eigen::Matrix<double, 5, 5> a = Eigen::Matrix<double, 5, 5>::Zero();
  a.block<3, 3>(0, 0) = a_cl;
  a.block<3, 2>(0, 3) = disturbance_input() * exosystem_output();
  a.block<2, 2>(3, 3) = s;
  return VectorField(
      {"x", "x_eta1", "x_eta2", "x_W1", "x_W2"},
      [a](double, const Eigen::VectorXd& x, const InputSignals&) {
        return Eigen::VectorXd(a * x);
      });
}

Trajectory simulate_closed_loop(const ControllerParams& params, double x0_plant,
                                const Eigen::Vector2d& x0_ctrl,
                                const Eigen::Vector2d& x0_exo, double t_final,
                                double dt) {
  params.validate();
  const HurwitzResult h = is_hurwitz(closed_loop_matrix(params));
  if (!h.hurwitz) {
    throw std::invalid_argument(
        "simulate_closed_loop: closed-loop matrix is not Hurwitz");
  }
  Eigen::VectorXd x0(5);
  x0 << x0_plant, x0_ctrl, x0_exo;
  return integrate(closed_loop_field(params), x0, 0.0, t_final, dt);
}

LinearSignals linear_signals(const Trajectory& traj,
                             const ControllerParams& params) {
  LinearSignals sig;
  sig.w.reserve(traj.size());
  sig.u.reserve(traj.size());
  sig.y.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    auto s = traj.state(i);
    const double y = s[0];
    sig.y.push_back(y);
    sig.u.push_back(params.k_y * y + params.k_eta(0) * s[1] +
                    params.k_eta(1) * s[2]);
    sig.w.push_back(s[3]);
  }
  return sig;
}

double steady_state_deviation(const Trajectory& traj, const Matrix3x2d& pi,
                              double tail_fraction) {
  double worst = 0.0;
  for (std::size_t i = traj.tail_begin(tail_fraction); i < traj.size(); ++i) {
    auto s = traj.state(i);
    const Eigen::Vector3d x_cl(s[0], s[1], s[2]);
    const Eigen::Vector2d x_w(s[3], s[4]);
    worst = std::max(worst, (x_cl - pi * x_w).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace eventreg::linear
