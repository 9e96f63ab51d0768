#pragma once

#include "qas/circuit.hpp"
#include "qas/noise.hpp"
#include "qas/state.hpp"

#include <Eigen/Dense>

namespace qas {

/// Maximum qubit count for Pauli-transfer-matrix evolution.
inline constexpr int kMaxPtmQubits = 6;

/// Real matrix acting on normalized-Pauli-basis coefficient vectors.
/// A CPTP map's PTM has first row (1, 0, ..., 0).
struct Ptm {
  Eigen::MatrixXd matrix;

  Eigen::Index dim() const { return matrix.rows(); }
  int n_qubits() const;
};

/// Pauli matrix for label 0..3 = I, X, Y, Z.
Eigen::Matrix2cd pauli_matrix(int label);

/// k-qubit Pauli product for a base-4 index; digit for qubit 0 is the most
/// significant.
Eigen::MatrixXcd pauli_product(std::int64_t index, int k);

/// R_ij = Tr(P_i U P_j U^dag) / 2^k.
Ptm to_ptm(const Eigen::MatrixXcd& unitary);
/// R_ij = Tr(P_i E(P_j)) / 2^k.
Ptm to_ptm(const KrausChannel& channel);

/// noise applied after gate: matrix product noise * gate.
Ptm fuse(const Ptm& gate_ptm, const Ptm& noise_ptm);

/// Coefficients c_a = Tr(P_a rho) / sqrt(2^n) over the normalized Pauli
/// basis, real for Hermitian rho. Round trips with pauli_vector_to_density.
Eigen::VectorXd density_to_pauli_vector(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd pauli_vector_to_density(const Eigen::VectorXd& coeffs, int n);

/// Applies a local PTM to the coefficient vector on the listed qubits.
void apply_local_ptm(Eigen::VectorXd& coeffs, const Ptm& ptm, const std::vector<int>& qubits,
                     int n);

/// Density-matrix evolution through fused gate+noise PTMs. Matches the
/// Kraus path within 1e-10; requires circuit.n <= kMaxPtmQubits. Fused
/// PTMs are cached per call keyed by exact gate parameters.
QuantumState ptm_evolve(const Circuit& circuit, const QuantumState& input,
                        const NoiseSpec& noise);

}  // namespace qas
