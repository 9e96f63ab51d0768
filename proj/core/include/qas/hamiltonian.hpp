#pragma once

#include "qas/state.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace qas {

struct PauliTerm {
  double coefficient = 0.0;
  std::string word;  // length-n over {I, X, Y, Z}
};

/// Weighted sum of n-qubit Pauli strings; Hermitian by construction.
/// Duplicate strings are merged on construction.
class PauliHamiltonian {
 public:
  PauliHamiltonian(int n, std::vector<PauliTerm> terms);

  int num_qubits() const { return n_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }

  /// Sum of |c_j| over all terms.
  double coefficient_l1() const;

  Eigen::MatrixXcd matrix() const;

 private:
  int n_;
  std::vector<PauliTerm> terms_;
};

/// One term per line: `<real-coefficient> <pauli-word>`. `#` starts a
/// comment, blank lines are skipped, duplicate words merge.
PauliHamiltonian parse_hamiltonian(const std::string& text);
PauliHamiltonian load_hamiltonian(const std::string& path);

/// Periodic spin ring: sum_j (1/3)(X_j X_{j+1} + Y_j Y_{j+1} + Z_j Z_{j+1}).
/// For n_spins = 2 both boundary terms land on the same pair and merge.
PauliHamiltonian heisenberg(int n_spins);

/// Tr(H rho). With `shots` set, adds a Gaussian perturbation of standard
/// deviation (sum_j |c_j|)/sqrt(shots), drawn from `rng`.
double expectation(const PauliHamiltonian& h, const QuantumState& state,
                   std::optional<std::int64_t> shots = std::nullopt,
                   std::mt19937_64* rng = nullptr);

struct Spectrum {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXcd eigenvectors; // columns matching eigenvalues
};

/// Dense Hermitian eigendecomposition; the ground-truth oracle.
Spectrum exact_spectrum(const PauliHamiltonian& h);

/// c_I - sum_{j != I} |c_j|: a proxy lower bound on the ground energy,
/// offset by the identity-string coefficient.
double fake_min_energy(const PauliHamiltonian& h);

}  // namespace qas
