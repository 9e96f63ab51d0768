// Internal fast path for repeated cost evaluations inside optimize_angles.
// Compiles a circuit once into flat ops and evaluates with in-place,
// allocation-free kernels; the noisy path precomputes fused PTMs.
// Matches vqsd_cost / vqe_energy bit-for-bit in the noiseless dense path
// and within numerical roundoff through the PTM path.
#pragma once

#include "qas/noise.hpp"
#include "qas/optimize.hpp"
#include "qas/ptm.hpp"
#include "qas/vqa.hpp"

#include <Eigen/Dense>

#include <optional>
#include <random>
#include <variant>
#include <vector>

namespace qas::detail {

struct CompiledOp {
  GateKind kind;
  int q0 = 0;
  int q1 = -1;
  int angle_index = -1;  // rotations index into the angle vector
};

class CompiledObjective {
 public:
  CompiledObjective(const VariationalProblem& problem, const Circuit& circuit,
                    const NoiseSpec* noise);

  int dimension() const { return dimension_; }

  /// Cost at the given angle vector; rng feeds the shot-noise model only.
  double evaluate(const Eigen::VectorXd& angles, std::mt19937_64* rng) const;

 private:
  double evaluate_dense(const Eigen::VectorXd& angles, std::mt19937_64* rng) const;
  double evaluate_ptm(const Eigen::VectorXd& angles, std::mt19937_64* rng) const;

  double finish_vqsd(double measured_purity, std::mt19937_64* rng) const;

  int n_ = 0;
  Eigen::Index dim_ = 0;
  int dimension_ = 0;
  bool is_vqsd_ = false;
  bool use_ptm_ = false;
  std::vector<CompiledOp> ops_;
  std::optional<std::int64_t> shots_;

  // Dense path state.
  Eigen::MatrixXcd initial_density_;  // VQSD target
  double purity_cache_ = 0.0;
  struct TermAction {
    double coefficient = 0.0;
    std::int64_t xmask = 0;
    std::vector<std::complex<double>> phase;
  };
  std::vector<TermAction> terms_;  // VQE Hamiltonian
  mutable Eigen::MatrixXcd rho_buf_;
  mutable Eigen::VectorXcd vec_buf_;

  // PTM path state.
  Eigen::VectorXd initial_pauli_;
  std::vector<Eigen::MatrixXd> fixed_ptms_;   // per op; empty for rotations
  std::optional<Eigen::MatrixXd> noise_1q_;   // fused after every rotation
  std::vector<std::pair<std::int64_t, double>> term_indices_;  // VQE: (pauli index, coeff)
  mutable Eigen::VectorXd pauli_buf_;
};

}  // namespace qas::detail
