#include "qas/random.hpp"

#include <cmath>

namespace qas {

namespace {

Eigen::MatrixXcd ginibre(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd g(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      g(r, c) = std::complex<double>(re, im);
    }
  }
  return g;
}

}  // namespace

Eigen::MatrixXcd haar_unitary(Eigen::Index dim, std::mt19937_64& rng) {
  const Eigen::MatrixXcd g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < dim; ++i) {
    const std::complex<double> d = r(i, i);
    q.col(i) *= d / std::abs(d);
  }
  return q;
}

QuantumState random_density_matrix(int n, std::mt19937_64& rng) {
  const Eigen::Index d = Eigen::Index{1} << n;
  const Eigen::MatrixXcd g = ginibre(d, d, rng);
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho /= rho.trace().real();
  return QuantumState::from_density(std::move(rho));
}

Circuit random_circuit(int n, int gate_count, std::mt19937_64& rng) {
  Circuit c(n);
  std::uniform_int_distribution<int> kind_dist(0, n >= 2 ? 3 : 2);
  std::uniform_int_distribution<int> qubit_dist(0, n - 1);
  std::uniform_real_distribution<double> angle_dist(0.0, 2.0 * M_PI);
  for (int i = 0; i < gate_count; ++i) {
    const int kind = kind_dist(rng);
    if (kind == 3) {
      int a = qubit_dist(rng);
      int b = qubit_dist(rng);
      while (b == a) b = qubit_dist(rng);
      c.append(Gate::cnot(a, b));
    } else {
      const int q = qubit_dist(rng);
      const double theta = angle_dist(rng);
      c.append(Gate{kind == 0 ? GateKind::RX : kind == 1 ? GateKind::RY : GateKind::RZ,
                    {q},
                    theta});
    }
  }
  return c;
}

}  // namespace qas
