#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "eventreg/dynamics.hpp"

namespace eventreg::linear {

using Matrix3x2d = Eigen::Matrix<double, 3, 2>;

/// Harmonic exosystem dx_W/dt = S x_W, w = C_W x_W (unit frequency).
Eigen::Matrix2d exosystem_matrix();
Eigen::RowVector2d exosystem_output();

/// Internal-model controller dx_eta/dt = Phi x_eta + G y,
/// u = k_y y + K_eta x_eta.
struct ControllerParams {
  Eigen::Matrix2d phi;
  Eigen::Vector2d g;
  double k_y = 0.0;
  Eigen::RowVector2d k_eta;

  /// Throws std::invalid_argument unless Phi has a purely imaginary pair
  /// +-j*omega (omega > 0) and (Phi, G) is controllable.
  void validate() const;
  /// True when Phi's eigenvalues are +-j to within 1e-9, i.e. Phi is a
  /// copy of the exosystem.
  bool embeds_unit_frequency() const;
};

/// Phi = [[0, w], [-w, 0]], G = (1, 0), k_y = 0, K_eta = (1, 0.5).
ControllerParams default_controller(double omega = 1.0);

/// [[-k_y - 1, -K_eta], [G, Phi]], plant state first.
Eigen::Matrix3d closed_loop_matrix(const ControllerParams& params);

/// Column through which w enters the closed loop (plant only).
Eigen::Vector3d disturbance_input();

struct HurwitzResult {
  bool hurwitz;
  double spectral_abscissa;
};

/// Hurwitz iff the spectral abscissa is below -1e-9.
HurwitzResult is_hurwitz(const Eigen::MatrixXd& m);

class NoUniqueSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FrancisSolution {
  Matrix3x2d pi;
  double residual;  ///< max |Pi S - A_cl Pi - B_cl C_W|
};

/// Solves Pi S = A_cl Pi + B_cl C_W through the 6x6 Kronecker system
/// (S^T (x) I - I (x) A_cl) vec(Pi) = vec(B_cl C_W).
FrancisSolution solve_francis(const Eigen::Matrix3d& a_cl,
                              const Eigen::Vector3d& b_cl,
                              const Eigen::Matrix2d& s,
                              const Eigen::RowVector2d& c_w);

/// Plant, controller and exosystem as one 5-state autonomous field.
/// Labels: x, x_eta1, x_eta2, x_W1, x_W2.
VectorField closed_loop_field(const ControllerParams& params);

/// Integrates closed_loop_field. Throws std::invalid_argument when the
/// closed-loop matrix is not Hurwitz.
Trajectory simulate_closed_loop(const ControllerParams& params, double x0_plant,
                                const Eigen::Vector2d& x0_ctrl,
                                const Eigen::Vector2d& x0_exo, double t_final,
                                double dt);

/// Derived signals along a simulated trajectory.
struct LinearSignals {
  std::vector<double> w, u, y;
};
LinearSignals linear_signals(const Trajectory& traj,
                             const ControllerParams& params);

/// max over the tail of |x_cl(t) - Pi x_W(t)|.
double steady_state_deviation(const Trajectory& traj, const Matrix3x2d& pi,
                              double tail_fraction);

}  // namespace eventreg::linear
