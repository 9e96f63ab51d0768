#include "qas/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qas {

const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    case GateKind::X: return "X";
    case GateKind::H: return "H";
  }
  return "?";
}

GateKind gate_kind_from_name(const std::string& name) {
  if (name == "RX") return GateKind::RX;
  if (name == "RY") return GateKind::RY;
  if (name == "RZ") return GateKind::RZ;
  if (name == "CNOT") return GateKind::CNOT;
  if (name == "CZ") return GateKind::CZ;
  if (name == "X") return GateKind::X;
  if (name == "H") return GateKind::H;
  throw std::invalid_argument("unknown gate kind: " + name);
}

void Gate::validate(int n) const {
  const std::size_t arity = is_two_qubit(kind) ? 2 : 1;
  if (qubits.size() != arity) {
    throw std::invalid_argument(std::string(gate_name(kind)) + ": expected " +
                                std::to_string(arity) + " qubit(s)");
  }
  for (int q : qubits) {
    if (q < 0 || q >= n) throw std::out_of_range("gate qubit index out of range");
  }
  if (arity == 2 && qubits[0] == qubits[1]) {
    throw std::invalid_argument("two-qubit gate with repeated qubit");
  }
  if (is_rotation(kind)) {
    if (!angle) throw std::invalid_argument("rotation gate missing angle");
    if (!std::isfinite(*angle)) throw std::invalid_argument("rotation angle not finite");
  } else if (angle) {
    throw std::invalid_argument("non-rotation gate carries an angle");
  }
}

Eigen::MatrixXcd gate_matrix(const Gate& g) {
  using cd = std::complex<double>;
  const cd i(0.0, 1.0);
  switch (g.kind) {
    case GateKind::RX: {
      const double t = *g.angle / 2.0;
      Eigen::MatrixXcd m(2, 2);
      m << std::cos(t), -i * std::sin(t), -i * std::sin(t), std::cos(t);
      return m;
    }
    case GateKind::RY: {
      const double t = *g.angle / 2.0;
      Eigen::MatrixXcd m(2, 2);
      m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
      return m;
    }
    case GateKind::RZ: {
      const double t = *g.angle / 2.0;
      Eigen::MatrixXcd m(2, 2);
      m << std::exp(-i * t), 0.0, 0.0, std::exp(i * t);
      return m;
    }
    case GateKind::X: {
      Eigen::MatrixXcd m(2, 2);
      m << 0, 1, 1, 0;
      return m;
    }
    case GateKind::H: {
      const double s = 1.0 / std::sqrt(2.0);
      Eigen::MatrixXcd m(2, 2);
      m << s, s, s, -s;
      return m;
    }
    case GateKind::CNOT: {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
      m(0, 0) = 1;
      m(1, 1) = 1;
      m(2, 3) = 1;
      m(3, 2) = 1;
      return m;
    }
    case GateKind::CZ: {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(4, 4);
      m(3, 3) = -1;
      return m;
    }
  }
  throw std::logic_error("unreachable gate kind");
}

Circuit::Circuit(int n) : n_(n) {
  if (n < 1 || n > kMaxQubits) {
    throw std::invalid_argument("circuit qubit count out of range");
  }
  moments_.assign(static_cast<std::size_t>(n), 0);
}

void Circuit::append(const Gate& g) {
  g.validate(n_);
  gates_.push_back(g);
  if (is_two_qubit(g.kind)) {
    const int m = std::max(moments_[g.qubits[0]], moments_[g.qubits[1]]);
    moments_[g.qubits[0]] = m + 1;
    moments_[g.qubits[1]] = m + 1;
  } else {
    moments_[g.qubits[0]] += 1;
  }
}

int Circuit::depth() const {
  return *std::max_element(moments_.begin(), moments_.end());
}

int Circuit::rotation_count() const {
  int c = 0;
  for (const auto& g : gates_) c += is_rotation(g.kind) ? 1 : 0;
  return c;
}

int Circuit::cnot_count() const {
  int c = 0;
  for (const auto& g : gates_) c += (g.kind == GateKind::CNOT) ? 1 : 0;
  return c;
}

std::vector<int> Circuit::recompute_moments() const {
  std::vector<int> m(static_cast<std::size_t>(n_), 0);
  for (const auto& g : gates_) {
    if (is_two_qubit(g.kind)) {
      const int t = std::max(m[g.qubits[0]], m[g.qubits[1]]);
      m[g.qubits[0]] = t + 1;
      m[g.qubits[1]] = t + 1;
    } else {
      m[g.qubits[0]] += 1;
    }
  }
  return m;
}

Circuit Circuit::bind_angles(const std::vector<double>& angles) const {
  if (static_cast<int>(angles.size()) != parameter_count()) {
    throw std::invalid_argument("angle count does not match rotation count");
  }
  Circuit out(n_);
  std::size_t next = 0;
  for (const auto& g : gates_) {
    Gate h = g;
    if (is_rotation(g.kind)) h.angle = angles[next++];
    out.append(h);
  }
  return out;
}

std::vector<double> Circuit::angles() const {
  std::vector<double> out;
  for (const auto& g : gates_) {
    if (is_rotation(g.kind)) out.push_back(*g.angle);
  }
  return out;
}

Circuit Circuit::inverse() const {
  Circuit out(n_);
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
    Gate g = *it;
    if (is_rotation(g.kind)) g.angle = -*g.angle;
    out.append(g);
  }
  return out;
}

}  // namespace qas
