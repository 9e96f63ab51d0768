#pragma once

#include "qas/state.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace qas {

/// CPTP channel in Kraus form on 1 or 2 qubits.
struct KrausChannel {
  int n_qubits = 1;
  std::vector<Eigen::MatrixXcd> operators;

  /// Throws unless sum K^dag K = I within 1e-12.
  void validate() const;
  bool is_identity() const;
};

KrausChannel identity_channel(int n_qubits);

/// (1-gamma) rho + gamma I/2^k, Kraus set {sqrt(1-3g/4) I, sqrt(g/4) X, Y, Z}
/// for one qubit and the 16-operator two-qubit analogue with uniform
/// off-identity weight gamma/16.
KrausChannel depolarizing(double gamma, int n_qubits);

/// K0 = diag(1, sqrt(1-gamma)), K1 = [[0, sqrt(gamma)], [0, 0]].
KrausChannel amplitude_damping(double gamma);

/// Mixed-unitary {sqrt(1-gamma) I, sqrt(gamma) X}.
KrausChannel random_x(double gamma);

/// Sequential composition: second acts after first. Kraus product set.
KrausChannel compose(const KrausChannel& first, const KrausChannel& second);

/// Sum_k K rho K^dag on the listed qubits; input promoted to density form.
QuantumState apply_channel(const QuantumState& state, const KrausChannel& channel,
                           const std::vector<int>& qubits);

/// Per-gate noise model: every one-qubit gate is followed by the one-qubit
/// channels in order, every two-qubit gate by the two-qubit channels, each
/// acting on the qubits the gate touched. `shots` switches expectation
/// values to the sampled-estimate model.
struct NoiseSpec {
  std::vector<KrausChannel> one_qubit_channels;
  std::vector<KrausChannel> two_qubit_channels;
  std::optional<std::int64_t> shots;

  bool is_trivial() const {
    return one_qubit_channels.empty() && two_qubit_channels.empty();
  }
  bool has_channels() const { return !is_trivial(); }

  /// Builds from the experiment-config fields; zero rates are omitted.
  static NoiseSpec make(double one_qubit_depolarizing, double two_qubit_depolarizing,
                        double amplitude_damping_gamma, double random_x_gamma,
                        std::optional<std::int64_t> shots);
};

}  // namespace qas
