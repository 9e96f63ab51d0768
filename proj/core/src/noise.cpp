#include "qas/noise.hpp"

#include "qas/ptm.hpp"

#include <cmath>
#include <stdexcept>

namespace qas {

namespace {

void check_probability(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("channel probability must lie in [0, 1]");
  }
}

}  // namespace

void KrausChannel::validate() const {
  if (n_qubits != 1 && n_qubits != 2) {
    throw std::invalid_argument("KrausChannel supports 1 or 2 qubits");
  }
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  if (operators.empty()) throw std::invalid_argument("KrausChannel has no operators");
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& k : operators) {
    if (k.rows() != d || k.cols() != d) {
      throw std::invalid_argument("Kraus operator dimension mismatch");
    }
    sum += k.adjoint() * k;
  }
  if ((sum - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("Kraus completeness violated beyond 1e-12");
  }
}

bool KrausChannel::is_identity() const {
  if (operators.size() != 1) return false;
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  return (operators[0] - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-15;
}

KrausChannel identity_channel(int n_qubits) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  KrausChannel ch;
  ch.n_qubits = n_qubits;
  ch.operators.push_back(Eigen::MatrixXcd::Identity(d, d));
  return ch;
}

KrausChannel depolarizing(double gamma, int n_qubits) {
  check_probability(gamma);
  if (n_qubits != 1 && n_qubits != 2) {
    throw std::invalid_argument("depolarizing supports 1 or 2 qubits");
  }
  if (gamma == 0.0) return identity_channel(n_qubits);
  const std::int64_t count = std::int64_t{1} << (2 * n_qubits);  // 4^k Paulis
  const double off_weight = gamma / static_cast<double>(count);
  KrausChannel ch;
  ch.n_qubits = n_qubits;
  for (std::int64_t p = 0; p < count; ++p) {
    const double w = (p == 0) ? 1.0 - gamma + off_weight : off_weight;
    if (w <= 0.0) continue;
    ch.operators.push_back(std::sqrt(w) * pauli_product(p, n_qubits));
  }
  ch.validate();
  return ch;
}

KrausChannel amplitude_damping(double gamma) {
  check_probability(gamma);
  KrausChannel ch;
  ch.n_qubits = 1;
  Eigen::MatrixXcd k0(2, 2), k1(2, 2);
  k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
  k1 << 0, std::sqrt(gamma), 0, 0;
  ch.operators.push_back(k0);
  if (gamma > 0.0) ch.operators.push_back(k1);
  ch.validate();
  return ch;
}

KrausChannel random_x(double gamma) {
  check_probability(gamma);
  KrausChannel ch;
  ch.n_qubits = 1;
  if (gamma < 1.0) {
    ch.operators.push_back(std::sqrt(1.0 - gamma) * Eigen::MatrixXcd::Identity(2, 2));
  }
  if (gamma > 0.0) {
    Eigen::MatrixXcd x(2, 2);
    x << 0, 1, 1, 0;
    ch.operators.push_back(std::sqrt(gamma) * x);
  }
  ch.validate();
  return ch;
}

KrausChannel compose(const KrausChannel& first, const KrausChannel& second) {
  if (first.n_qubits != second.n_qubits) {
    throw std::invalid_argument("composed channels must act on equal qubit counts");
  }
  KrausChannel out;
  out.n_qubits = first.n_qubits;
  for (const auto& b : second.operators) {
    for (const auto& a : first.operators) {
      Eigen::MatrixXcd k = b * a;
      if (k.cwiseAbs().maxCoeff() > 0.0) out.operators.push_back(std::move(k));
    }
  }
  out.validate();
  return out;
}

QuantumState apply_channel(const QuantumState& state, const KrausChannel& channel,
                           const std::vector<int>& qubits) {
  if (static_cast<int>(qubits.size()) != channel.n_qubits) {
    throw std::invalid_argument("channel arity does not match qubit list");
  }
  const Eigen::MatrixXcd rho = state.to_density();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  for (const auto& k : channel.operators) {
    out += conjugate_by_matrix(rho, k, qubits, state.num_qubits());
  }
  return QuantumState::from_density(std::move(out));
}

NoiseSpec NoiseSpec::make(double one_qubit_depolarizing, double two_qubit_depolarizing,
                          double amplitude_damping_gamma, double random_x_gamma,
                          std::optional<std::int64_t> shots) {
  NoiseSpec spec;
  if (one_qubit_depolarizing > 0.0) {
    spec.one_qubit_channels.push_back(depolarizing(one_qubit_depolarizing, 1));
  }
  if (amplitude_damping_gamma > 0.0) {
    spec.one_qubit_channels.push_back(amplitude_damping(amplitude_damping_gamma));
  }
  if (random_x_gamma > 0.0) {
    spec.one_qubit_channels.push_back(random_x(random_x_gamma));
  }
  if (two_qubit_depolarizing > 0.0) {
    spec.two_qubit_channels.push_back(depolarizing(two_qubit_depolarizing, 2));
  }
  if (shots) {
    if (*shots <= 0) throw std::invalid_argument("shot count must be positive");
    spec.shots = shots;
  }
  return spec;
}

}  // namespace qas
