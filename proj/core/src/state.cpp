#include "qas/state.hpp"

#include "qas/noise.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace qas {

namespace {

constexpr double kNormTol = 1e-10;

void check_qubit_count(int n) {
  if (n < 1 || n > kMaxQubits) {
    throw std::invalid_argument("qubit count out of supported range [1, " +
                                std::to_string(kMaxQubits) + "]");
  }
}

int qubits_from_dim(std::int64_t d) {
  int n = 0;
  while ((std::int64_t{1} << n) < d) ++n;
  if ((std::int64_t{1} << n) != d) throw std::invalid_argument("dimension is not a power of two");
  return n;
}

}  // namespace

QuantumState::QuantumState(int n) : n_(n), is_density_(false) {
  check_qubit_count(n);
  vec_ = Eigen::VectorXcd::Zero(dim());
  vec_(0) = 1.0;
}

QuantumState QuantumState::from_vector(Eigen::VectorXcd amplitudes) {
  QuantumState s;
  s.n_ = qubits_from_dim(amplitudes.size());
  check_qubit_count(s.n_);
  s.is_density_ = false;
  s.vec_ = std::move(amplitudes);
  return s;
}

QuantumState QuantumState::from_density(Eigen::MatrixXcd rho) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix must be square");
  QuantumState s;
  s.n_ = qubits_from_dim(rho.rows());
  check_qubit_count(s.n_);
  s.is_density_ = true;
  s.rho_ = std::move(rho);
  return s;
}

QuantumState QuantumState::basis_state(int n, std::uint64_t index) {
  QuantumState s(n);
  if (index >= static_cast<std::uint64_t>(s.dim())) {
    throw std::out_of_range("basis state index out of range");
  }
  s.vec_.setZero();
  s.vec_(static_cast<Eigen::Index>(index)) = 1.0;
  return s;
}

const Eigen::VectorXcd& QuantumState::vector() const {
  if (is_density_) throw std::logic_error("state is a density matrix, not a statevector");
  return vec_;
}

const Eigen::MatrixXcd& QuantumState::density_view() const {
  if (!is_density_) throw std::logic_error("state is a statevector, not a density matrix");
  return rho_;
}

Eigen::MatrixXcd QuantumState::to_density() const {
  if (is_density_) return rho_;
  return vec_ * vec_.adjoint();
}

QuantumState QuantumState::promoted() const {
  if (is_density_) return *this;
  return from_density(to_density());
}

void QuantumState::validate() const {
  if (!is_density_) {
    if (std::abs(vec_.norm() - 1.0) > kNormTol) {
      throw std::runtime_error("statevector norm deviates from 1");
    }
    return;
  }
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kNormTol) {
    throw std::runtime_error("density matrix not Hermitian");
  }
  if (std::abs(rho_.trace().real() - 1.0) > kNormTol || std::abs(rho_.trace().imag()) > kNormTol) {
    throw std::runtime_error("density matrix trace deviates from 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kNormTol) {
    throw std::runtime_error("density matrix has a negative eigenvalue");
  }
}

namespace {

// Applies m to the row index of `data` (a vector or each column of a
// matrix) on the given qubits. Qubit 0 is the MSB of the row index and
// qubits[0] is the most significant sub-index of m.
void apply_on_rows(Eigen::MatrixXcd& data, const Eigen::MatrixXcd& m,
                   const std::vector<int>& qubits, int n) {
  const int k = static_cast<int>(qubits.size());
  const std::int64_t sub = std::int64_t{1} << k;
  if (m.rows() != sub || m.cols() != sub) {
    throw std::invalid_argument("operator dimension does not match qubit count");
  }
  for (int q : qubits) {
    if (q < 0 || q >= n) throw std::out_of_range("operator qubit index out of range");
  }
  std::vector<std::int64_t> bit(qubits.size());
  for (int j = 0; j < k; ++j) bit[j] = std::int64_t{1} << (n - 1 - qubits[j]);

  const std::int64_t dim = std::int64_t{1} << n;
  std::vector<Eigen::Index> idx(sub);
  Eigen::VectorXcd scratch(sub);
  for (std::int64_t base = 0; base < dim; ++base) {
    bool is_base = true;
    for (int j = 0; j < k; ++j) is_base &= ((base & bit[j]) == 0);
    if (!is_base) continue;
    for (std::int64_t s = 0; s < sub; ++s) {
      std::int64_t row = base;
      for (int j = 0; j < k; ++j) {
        if ((s >> (k - 1 - j)) & 1) row |= bit[j];
      }
      idx[s] = row;
    }
    for (Eigen::Index col = 0; col < data.cols(); ++col) {
      for (std::int64_t s = 0; s < sub; ++s) scratch(s) = data(idx[s], col);
      scratch = m * scratch;
      for (std::int64_t s = 0; s < sub; ++s) data(idx[s], col) = scratch(s);
    }
  }
}

}  // namespace

Eigen::VectorXcd apply_matrix_vec(const Eigen::VectorXcd& v, const Eigen::MatrixXcd& m,
                                  const std::vector<int>& qubits, int n) {
  Eigen::MatrixXcd data = v;
  apply_on_rows(data, m, qubits, n);
  return data.col(0);
}

Eigen::MatrixXcd apply_matrix_left(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& m,
                                   const std::vector<int>& qubits, int n) {
  Eigen::MatrixXcd data = rho;
  apply_on_rows(data, m, qubits, n);
  return data;
}

Eigen::MatrixXcd conjugate_by_matrix(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& m,
                                     const std::vector<int>& qubits, int n) {
  Eigen::MatrixXcd left = apply_matrix_left(rho, m, qubits, n);
  Eigen::MatrixXcd right = apply_matrix_left(left.adjoint(), m, qubits, n);
  return right.adjoint();
}

QuantumState apply_gate(const QuantumState& state, const Gate& gate) {
  gate.validate(state.num_qubits());
  const Eigen::MatrixXcd u = gate_matrix(gate);
  if (state.is_density()) {
    return QuantumState::from_density(
        conjugate_by_matrix(state.density_view(), u, gate.qubits, state.num_qubits()));
  }
  return QuantumState::from_vector(
      apply_matrix_vec(state.vector(), u, gate.qubits, state.num_qubits()));
}

QuantumState run_circuit(const Circuit& circuit, const QuantumState& input,
                         const NoiseSpec* noise) {
  if (circuit.num_qubits() != input.num_qubits()) {
    throw std::invalid_argument("circuit and state qubit counts differ");
  }
  const bool noisy = noise != nullptr && !noise->is_trivial();
  QuantumState state = noisy ? input.promoted() : input;
  for (const auto& g : circuit.gates()) {
    state = apply_gate(state, g);
    if (noisy) {
      const auto& channels =
          is_two_qubit(g.kind) ? noise->two_qubit_channels : noise->one_qubit_channels;
      for (const auto& ch : channels) {
        state = apply_channel(state, ch, g.qubits);
      }
    }
  }
  return state;
}

double purity(const QuantumState& state) {
  if (!state.is_density()) {
    const double s = state.vector().squaredNorm();
    return s * s;
  }
  // Tr(rho^2) equals the squared Frobenius norm for Hermitian rho.
  return state.density_view().squaredNorm();
}

QuantumState partial_trace(const QuantumState& state, const std::set<int>& keep) {
  const int n = state.num_qubits();
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  for (int q : keep) {
    if (q < 0 || q >= n) throw std::out_of_range("partial_trace: qubit index out of range");
  }
  std::vector<int> kept(keep.begin(), keep.end());
  std::vector<int> traced;
  for (int q = 0; q < n; ++q) {
    if (!keep.count(q)) traced.push_back(q);
  }
  const int nk = static_cast<int>(kept.size());
  const int nt = static_cast<int>(traced.size());
  const Eigen::MatrixXcd rho = state.to_density();

  auto compose = [&](std::int64_t kept_bits, std::int64_t traced_bits) {
    std::int64_t full = 0;
    for (int j = 0; j < nk; ++j) {
      if ((kept_bits >> (nk - 1 - j)) & 1) full |= std::int64_t{1} << (n - 1 - kept[j]);
    }
    for (int j = 0; j < nt; ++j) {
      if ((traced_bits >> (nt - 1 - j)) & 1) full |= std::int64_t{1} << (n - 1 - traced[j]);
    }
    return full;
  };

  const std::int64_t dk = std::int64_t{1} << nk;
  const std::int64_t dt = std::int64_t{1} << nt;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);
  for (std::int64_t r = 0; r < dk; ++r) {
    for (std::int64_t c = 0; c < dk; ++c) {
      std::complex<double> acc = 0.0;
      for (std::int64_t t = 0; t < dt; ++t) {
        acc += rho(compose(r, t), compose(c, t));
      }
      out(r, c) = acc;
    }
  }
  return QuantumState::from_density(std::move(out));
}

QuantumState dephase(const QuantumState& state) {
  Eigen::MatrixXcd rho = state.to_density();
  Eigen::VectorXcd d = rho.diagonal();
  rho.setZero();
  rho.diagonal() = d;
  return QuantumState::from_density(std::move(rho));
}

std::vector<double> diagonal_elements(const QuantumState& state) {
  const Eigen::MatrixXcd rho = state.to_density();
  std::vector<double> out(static_cast<std::size_t>(rho.rows()));
  for (Eigen::Index i = 0; i < rho.rows(); ++i) out[i] = rho(i, i).real();
  return out;
}

}  // namespace qas
