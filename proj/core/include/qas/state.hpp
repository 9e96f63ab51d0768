#pragma once

#include "qas/circuit.hpp"
#include "qas/gates.hpp"

#include <Eigen/Dense>

#include <optional>
#include <set>
#include <vector>

namespace qas {

struct NoiseSpec;  // noise.hpp

/// Pure statevector or density matrix over n qubits.
///
/// Qubit 0 is the most significant bit of a basis-state index: |q0 q1 ... >
/// maps to index (q0 << (n-1)) | ... | q_{n-1}. Global phase is never
/// normalized away.
class QuantumState {
 public:
  /// |0...0> statevector.
  explicit QuantumState(int n);

  static QuantumState from_vector(Eigen::VectorXcd amplitudes);
  static QuantumState from_density(Eigen::MatrixXcd rho);
  static QuantumState basis_state(int n, std::uint64_t index);

  int num_qubits() const { return n_; }
  std::int64_t dim() const { return std::int64_t{1} << n_; }
  bool is_density() const { return is_density_; }

  const Eigen::VectorXcd& vector() const;
  const Eigen::MatrixXcd& density_view() const;

  /// Density-matrix form; statevectors are promoted by outer product.
  Eigen::MatrixXcd to_density() const;
  QuantumState promoted() const;

  /// Throws unless the statevector has unit norm (1e-10) or the density
  /// matrix is Hermitian, PSD (eigenvalues >= -1e-10) and unit trace (1e-10).
  void validate() const;

 private:
  QuantumState() = default;
  int n_ = 0;
  bool is_density_ = false;
  Eigen::VectorXcd vec_;
  Eigen::MatrixXcd rho_;
};

/// U rho U^dag or U|psi>; representation is preserved.
QuantumState apply_gate(const QuantumState& state, const Gate& gate);

/// Applies an arbitrary matrix on the listed qubits (first listed qubit is
/// the most significant sub-index). Works for non-unitary Kraus operators.
Eigen::VectorXcd apply_matrix_vec(const Eigen::VectorXcd& v, const Eigen::MatrixXcd& m,
                                  const std::vector<int>& qubits, int n);
Eigen::MatrixXcd apply_matrix_left(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& m,
                                   const std::vector<int>& qubits, int n);
/// M rho M^dag on the listed qubits.
Eigen::MatrixXcd conjugate_by_matrix(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& m,
                                     const std::vector<int>& qubits, int n);

/// Runs the circuit gate by gate. With a NoiseSpec present the state is
/// promoted to a density matrix and each gate is followed by the spec's
/// channel on exactly the qubits the gate touched.
QuantumState run_circuit(const Circuit& circuit, const QuantumState& input,
                         const NoiseSpec* noise = nullptr);

/// Tr(rho^2), in [1/2^n, 1].
double purity(const QuantumState& state);

/// Reduced density matrix on the kept qubits (ascending order).
QuantumState partial_trace(const QuantumState& state, const std::set<int>& keep);

/// Zeroes all off-diagonal entries in the computational basis.
QuantumState dephase(const QuantumState& state);

/// <b|rho|b> for all 2^n bitstrings, in index order.
std::vector<double> diagonal_elements(const QuantumState& state);

}  // namespace qas
