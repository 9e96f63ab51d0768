#pragma once

#include "qas/circuit.hpp"
#include "qas/hamiltonian.hpp"
#include "qas/noise.hpp"
#include "qas/state.hpp"

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace qas {

/// State-diagonalization instance: the target density matrix and its
/// (cached) purity, the constant first term of the cost.
struct VqsdProblem {
  QuantumState target;
  double purity_cache;

  static VqsdProblem make(QuantumState target_state);
};

/// Ground-energy instance: Hamiltonian, optional oracle energy and the
/// fake-minimum proxy used by the curriculum.
struct VqeProblem {
  std::shared_ptr<const PauliHamiltonian> hamiltonian;
  std::optional<double> ground_truth;
  double fake_min;

  static VqeProblem make(PauliHamiltonian h, bool with_oracle_energy = true);
};

/// Tr(rho^2) - sum_b <b|rho~|b>^2 with angles bound in gate order.
/// With noise->shots set, the measured term gains a Gaussian perturbation
/// of standard deviation 1/sqrt(shots).
double vqsd_cost(const VqsdProblem& problem, const Circuit& circuit,
                 const std::vector<double>& angles, const NoiseSpec* noise = nullptr,
                 std::mt19937_64* rng = nullptr);

/// <psi(theta)|H|psi(theta)> from |0...0>, or Tr(H rho(theta)) under noise.
/// Noisy evolution uses the PTM path for n <= 6 and Kraus otherwise.
double vqe_energy(const VqeProblem& problem, const Circuit& circuit,
                  const std::vector<double>& angles, const NoiseSpec* noise = nullptr,
                  std::mt19937_64* rng = nullptr);

/// Diagonal of rho~ sorted descending, paired with basis bitstrings.
std::pair<std::vector<double>, std::vector<std::uint64_t>> eigen_readout(
    const VqsdProblem& problem, const Circuit& circuit, const std::vector<double>& angles);

/// U(theta)^dag X^{b1} x ... x X^{bn} |0...0>: the inferred eigenvector for
/// a readout bitstring.
QuantumState eigenvector_prepare(const Circuit& circuit, const std::vector<double>& angles,
                                 const std::vector<int>& bitstring);

/// sum_{i<=m} (true_i - inferred_i)^2, both lists sorted descending.
double eigenvalue_error(const std::vector<double>& true_vals, const std::vector<double>& inferred,
                        int m);

enum class LheaFlavor { RYCZ, RZRX_CNOT, RYRZRY_CNOT };

LheaFlavor lhea_flavor_from_name(const std::string& name);

struct LheaSpec {
  int layers = 1;
  LheaFlavor flavor = LheaFlavor::RYRZRY_CNOT;
  /// Entangled pairs per layer; defaults to the nearest-neighbor chain.
  std::vector<std::pair<int, int>> connectivity;
};

/// Layered hardware-efficient ansatz. Per pair and layer:
///   RYCZ:        RY on both, CZ, RY on both
///   RZRX_CNOT:   RZ RX on both, CNOT, RZ RX on both
///   RYRZRY_CNOT: RY RZ RY on both, CNOT, RY RZ RY on both
Circuit build_lhea(int n, const LheaSpec& spec);

}  // namespace qas
