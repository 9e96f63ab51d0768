#pragma once

#include "qas/circuit.hpp"
#include "qas/noise.hpp"
#include "qas/optimize.hpp"
#include "qas/state.hpp"

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace qas {

/// CPTP map on n qubits in Kraus form; unitaries are single-operator
/// channels and compositions multiply out the Kraus sets.
struct Channel {
  int n = 1;
  std::vector<Eigen::MatrixXcd> kraus;

  static Channel identity(int n);
  static Channel from_unitary(const Eigen::MatrixXcd& u);
  static Channel from_circuit(const Circuit& circuit);
  static Channel from_kraus(int n, std::vector<Eigen::MatrixXcd> operators);
  /// Embeds a 1-qubit KrausChannel applied to every qubit independently.
  static Channel from_local(const KrausChannel& local, int n);
  static Channel composition(const std::vector<Channel>& steps);
  /// Stinespring dilation of a Haar unitary; rank <= 4^n.
  static Channel random(int n, int rank, std::mt19937_64& rng);

  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;
  void validate() const;
};

/// (I x Phi)|Omega><Omega| on 2n qubits with |Omega> normalized, so the
/// output is unit trace. Reference register first.
QuantumState choi_state(const Channel& channel);

/// Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)) via
/// eigendecomposition square roots. Convention: NOT squared.
double fidelity_exact(const QuantumState& rho, const QuantumState& sigma);

/// E(rho, sigma) = tr(rho sigma) + sqrt(2 [ (tr rho sigma)^2 - tr(rho sigma rho sigma) ]).
/// Lower bound on the squared fidelity F^2.
double subfidelity(const QuantumState& rho, const QuantumState& sigma);

/// G(rho, sigma) = tr(rho sigma) + sqrt((1 - tr rho^2)(1 - tr sigma^2)).
/// Upper bound on the squared fidelity F^2.
double superfidelity(const QuantumState& rho, const QuantumState& sigma);

/// Count of negative-radicand clips in sub/superfidelity since process
/// start; clipped radicands evaluate as zero.
long fidelity_clip_warnings();

enum class FidelityConvention { SqrtFidelity, SquaredFidelity };

struct FidelityBounds {
  double lower = 0.0;
  double upper = 0.0;
  int m = 0;
  FidelityConvention convention = FidelityConvention::SqrtFidelity;
};

/// Truncated fidelity bounds from the m largest eigenpairs of rho:
/// T_ij = sqrt(r_i r_j) <r_i|sigma|r_j>, lower = sum_i sqrt(lambda_i(T)),
/// upper = lower + sqrt((1 - sum r_i)(1 - sum <r_i|sigma|r_i>)).
/// Sandwiches the plain (sqrt) fidelity.
FidelityBounds truncated_bounds(const std::vector<double>& eigenvalues,
                                const std::vector<Eigen::VectorXcd>& eigenvectors,
                                const QuantumState& sigma, int m);

/// Produces a diagonalizing circuit for a density matrix. Engines based on
/// a fixed ansatz report the reached cost; threshold_met tells the caller
/// whether the basis is trustworthy.
struct DiagonalizationResult {
  Circuit circuit;
  std::vector<double> angles;
  double cost = 0.0;
  bool threshold_met = false;
};
using VqsdEngine =
    std::function<DiagonalizationResult(const QuantumState&, std::mt19937_64&, const NoiseSpec*)>;

/// Layered RY-RZ rotations with an entangling chain per layer and a
/// trailing rotation layer, optimized until `threshold` or the restart
/// budget runs out. A NoiseSpec threaded by certify() makes the cost
/// evaluations noisy.
VqsdEngine lhea_vqsd_engine(int layers, GateKind entangler, const OptimizeOptions& options,
                            double threshold);

struct CertifyReport {
  int m = 0;
  std::vector<double> inferred_eigenvalues;     // descending
  std::vector<FidelityBounds> bounds_per_m;     // m' = 1..m, sqrt convention
  double subfidelity_value = 0.0;               // squared-F convention
  double superfidelity_value = 0.0;
  double exact_fidelity = 0.0;                  // sqrt convention oracle
  double truncated_fidelity_error = 0.0;        // lower(m) - exact
  double vqsd_cost = 0.0;
  bool vqsd_threshold_met = false;

  std::string to_json() const;
};

/// Certifies `candidate` against `ideal`: diagonalizes J(ideal) with the
/// engine, reads inferred eigenpairs, evaluates <r_i|J(candidate)|r_j>
/// and reports truncated bounds per rank plus SSFB and the certification
/// error. A NoiseSpec makes the diagonalizing ansatz noisy (optimization
/// and eigenvalue readout both run through the noisy circuit).
CertifyReport certify(const Channel& ideal, const Channel& candidate, const VqsdEngine& engine,
                      int m, std::mt19937_64& rng, const NoiseSpec* noise = nullptr);

}  // namespace qas
