#include "eventreg/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace eventreg {

IntegrationDiverged::IntegrationDiverged(double time, const std::string& what)
    : std::runtime_error(what), time_(time) {}

StateVector::StateVector(std::vector<double> v, std::vector<std::string> l)
    : values(std::move(v)), labels(std::move(l)) {
  if (values.empty() || values.size() != labels.size()) {
    throw std::invalid_argument(
        "StateVector: values and labels must be non-empty and of equal length");
  }
  for (double x : values) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("StateVector: non-finite value");
    }
  }
}

Eigen::VectorXd StateVector::to_eigen() const {
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(size()));
}

InputSignals& InputSignals::set(const std::string& name, Signal signal) {
  signals_[name] = std::move(signal);
  return *this;
}

bool InputSignals::contains(const std::string& name) const {
  return signals_.count(name) != 0;
}

double InputSignals::operator()(const std::string& name, double t) const {
  auto it = signals_.find(name);
  if (it == signals_.end()) {
    throw std::out_of_range("InputSignals: no input named '" + name + "'");
  }
  return it->second(t);
}

InputSignals InputSignals::frozen(const std::map<std::string, double>& values) {
  InputSignals inputs;
  for (const auto& [name, value] : values) {
    inputs.set(name, [v = value](double) { return v; });
  }
  return inputs;
}

VectorField::VectorField(std::vector<std::string> state_labels, Rhs f)
    : dimension(state_labels.size()),
      labels(std::move(state_labels)),
      rhs(std::move(f)) {
  if (dimension == 0) {
    throw std::invalid_argument("VectorField: dimension must be positive");
  }
}

Eigen::VectorXd VectorField::operator()(double t, const Eigen::VectorXd& x,
                                        const InputSignals& inputs) const {
  Eigen::VectorXd dx = rhs(t, x, inputs);
  if (static_cast<std::size_t>(dx.size()) != dimension) {
    throw std::logic_error("VectorField: rhs returned wrong dimension");
  }
  return dx;
}

Trajectory::Trajectory(std::vector<std::string> labels, double t0, double dt)
    : labels_(std::move(labels)), t0_(t0), dt_(dt) {}

void Trajectory::push_back(const Eigen::VectorXd& x) {
  // Times are t0 + i*dt rather than accumulated, so spacing stays exact.
  times_.push_back(t0_ + static_cast<double>(times_.size()) * dt_);
  data_.insert(data_.end(), x.data(), x.data() + x.size());
}

std::span<const double> Trajectory::state(std::size_t i) const {
  return {data_.data() + i * dimension(), dimension()};
}

Eigen::VectorXd Trajectory::state_vector(std::size_t i) const {
  auto s = state(i);
  return Eigen::Map<const Eigen::VectorXd>(s.data(),
                                           static_cast<Eigen::Index>(s.size()));
}

StateVector Trajectory::labeled_state(std::size_t i) const {
  auto s = state(i);
  return StateVector({s.begin(), s.end()}, labels_);
}

bool Trajectory::has_label(const std::string& label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t Trajectory::label_index(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) {
    throw std::out_of_range("Trajectory: no state labeled '" + label + "'");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

std::vector<double> Trajectory::column(const std::string& label) const {
  const std::size_t j = label_index(label);
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = data_[i * dimension() + j];
  return out;
}

std::size_t Trajectory::tail_begin(double fraction) const {
  if (times_.empty()) return 0;
  const double start =
      times_.back() - std::clamp(fraction, 0.0, 1.0) * (times_.back() - t0_);
  auto it = std::lower_bound(times_.begin(), times_.end(), start - 1e-9 * dt_);
  return static_cast<std::size_t>(it - times_.begin());
}

namespace {

void check_finite(const Eigen::VectorXd& x, double t) {
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "integration diverged at t = " << t;
    throw IntegrationDiverged(t, msg.str());
  }
}

}  // namespace

Trajectory integrate(const VectorField& field, const Eigen::VectorXd& x0,
                     double t0, double t_final, double dt,
                     const InputSignals& inputs) {
  if (!(t_final > t0)) throw std::invalid_argument("integrate: t_final <= t0");
  if (!(dt > 0)) throw std::invalid_argument("integrate: dt must be positive");
  if (static_cast<std::size_t>(x0.size()) != field.dimension) {
    throw std::invalid_argument("integrate: x0 dimension mismatch");
  }
  check_finite(x0, t0);

  const auto steps =
      static_cast<std::size_t>(std::floor((t_final - t0) / dt + 1e-9));
  Trajectory traj(field.labels, t0, dt);
  Eigen::VectorXd x = x0;
  traj.push_back(x);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    const Eigen::VectorXd k1 = field(t, x, inputs);
    const Eigen::VectorXd k2 = field(t + 0.5 * dt, x + 0.5 * dt * k1, inputs);
    const Eigen::VectorXd k3 = field(t + 0.5 * dt, x + 0.5 * dt * k2, inputs);
    const Eigen::VectorXd k4 = field(t + dt, x + dt * k3, inputs);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(x, t + dt);
    traj.push_back(x);
  }
  return traj;
}

Trajectory integrate(const VectorField& field, const StateVector& x0,
                     double t0, double t_final, double dt,
                     const InputSignals& inputs) {
  return integrate(field, x0.to_eigen(), t0, t_final, dt, inputs);
}

Eigen::MatrixXd jacobian_fd(const VectorField& field, const Eigen::VectorXd& x,
                            const InputSignals& inputs, double h, double t) {
  if (!(h > 0)) throw std::invalid_argument("jacobian_fd: h must be positive");
  const auto n = static_cast<Eigen::Index>(field.dimension);
  Eigen::MatrixXd jac(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const Eigen::VectorXd fp = field(t, xp, inputs);
    const Eigen::VectorXd fm = field(t, xm, inputs);
    if (!fp.allFinite() || !fm.allFinite()) {
      throw std::runtime_error("jacobian_fd: non-finite field evaluation");
    }
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const Trajectory& traj,
               const std::vector<DerivedColumn>& extra) {
  for (const auto& col : extra) {
    if (col.values.size() != traj.size()) {
      throw std::invalid_argument("write_csv: derived column '" + col.label +
                                  "' has wrong length");
    }
  }
  std::string line = "t";
  for (const auto& l : traj.labels()) line += "," + l;
  for (const auto& col : extra) line += "," + col.label;
  out << line << '\n';

  char buf[64];
  auto append = [&](double v) {
    auto res = std::to_chars(buf, buf + sizeof(buf), v,
                             std::chars_format::general, 9);
    line.append(buf, res.ptr);
  };
  for (std::size_t i = 0; i < traj.size(); ++i) {
    line.clear();
    append(traj.times()[i]);
    for (double v : traj.state(i)) {
      line += ',';
      append(v);
    }
    for (const auto& col : extra) {
      line += ',';
      append(col.values[i]);
    }
    line += '\n';
    out << line;
  }
}

void write_csv(const std::string& path, const Trajectory& traj,
               const std::vector<DerivedColumn>& extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  write_csv(out, traj, extra);
}

}  // namespace eventreg
