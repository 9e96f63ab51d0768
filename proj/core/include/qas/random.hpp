#pragma once

#include "qas/circuit.hpp"
#include "qas/state.hpp"

#include <Eigen/Dense>

#include <random>

namespace qas {

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
Eigen::MatrixXcd haar_unitary(Eigen::Index dim, std::mt19937_64& rng);

/// Full-rank mixed state G G^dag / Tr(G G^dag), Hilbert-Schmidt measure.
QuantumState random_density_matrix(int n, std::mt19937_64& rng);

/// Random circuit over {RX, RY, RZ, CNOT} with uniform angles.
Circuit random_circuit(int n, int gate_count, std::mt19937_64& rng);

}  // namespace qas
