#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eventreg {

/// Thrown when a non-finite state shows up during integration.
class IntegrationDiverged : public std::runtime_error {
 public:
  IntegrationDiverged(double time, const std::string& what);
  double time() const { return time_; }

 private:
  double time_;
};

/// A labeled point in state space.
struct StateVector {
  std::vector<double> values;
  std::vector<std::string> labels;

  StateVector() = default;
  StateVector(std::vector<double> v, std::vector<std::string> l);

  std::size_t size() const { return values.size(); }
  Eigen::VectorXd to_eigen() const;
};

/// Scalar signal of time, e.g. an exogenous input.
using Signal = std::function<double(double)>;

/// Named exogenous inputs. Evaluated inside every Runge-Kutta stage.
class InputSignals {
 public:
  InputSignals() = default;

  InputSignals& set(const std::string& name, Signal signal);
  bool contains(const std::string& name) const;
  double operator()(const std::string& name, double t) const;

  /// Inputs held at constant values, as needed for Jacobian evaluation.
  static InputSignals frozen(const std::map<std::string, double>& values);

 private:
  std::map<std::string, Signal> signals_;
};

/// dx/dt = rhs(t, x, inputs).
struct VectorField {
  using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&,
                                            const InputSignals&)>;

  std::size_t dimension = 0;
  std::vector<std::string> labels;
  Rhs rhs;

  VectorField() = default;
  VectorField(std::vector<std::string> state_labels, Rhs f);

  Eigen::VectorXd operator()(double t, const Eigen::VectorXd& x,
                             const InputSignals& inputs) const;
};

/// Densely sampled solution of an ODE. Row i holds the state at times()[i].
class Trajectory {
 public:
  Trajectory(std::vector<std::string> labels, double t0, double dt);

  void push_back(const Eigen::VectorXd& x);

  std::size_t size() const { return times_.size(); }
  std::size_t dimension() const { return labels_.size(); }
  double dt() const { return dt_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<std::string>& labels() const { return labels_; }

  std::span<const double> state(std::size_t i) const;
  Eigen::VectorXd state_vector(std::size_t i) const;
  StateVector labeled_state(std::size_t i) const;
  Eigen::VectorXd front() const { return state_vector(0); }
  Eigen::VectorXd back() const { return state_vector(size() - 1); }

  bool has_label(const std::string& label) const;
  std::size_t label_index(const std::string& label) const;
  /// Column of one coordinate over time. Throws std::out_of_range on an
  /// unknown label.
  std::vector<double> column(const std::string& label) const;

  /// First sample index whose time lies in the last `fraction` of the span.
  std::size_t tail_begin(double fraction) const;

 private:
  std::vector<std::string> labels_;
  double t0_;
  double dt_;
  std::vector<double> times_;
  std::vector<double> data_;
};

/// Classical fixed-step fourth-order Runge-Kutta. Samples t0 + i*dt for
/// i = 0..floor((t_final - t0)/dt).
Trajectory integrate(const VectorField& field, const Eigen::VectorXd& x0,
                     double t0, double t_final, double dt,
                     const InputSignals& inputs = {});

Trajectory integrate(const VectorField& field, const StateVector& x0,
                     double t0, double t_final, double dt,
                     const InputSignals& inputs = {});

/// Central finite-difference Jacobian of `field` at (t, x).
Eigen::MatrixXd jacobian_fd(const VectorField& field, const Eigen::VectorXd& x,
                            const InputSignals& inputs, double h = 1e-6,
                            double t = 0.0);

/// Extra columns appended to a CSV export (e.g. derived outputs).
struct DerivedColumn {
  std::string label;
  std::vector<double> values;
};

/// `t,<label1>,...` header, one row per sample, 9 significant digits, LF.
void write_csv(std::ostream& out, const Trajectory& traj,
               const std::vector<DerivedColumn>& extra = {});
void write_csv(const std::string& path, const Trajectory& traj,
               const std::vector<DerivedColumn>& extra = {});

/// Formats with 9 significant digits, the precision used by every export.
std::string format_number(double value);

}  // namespace eventreg
