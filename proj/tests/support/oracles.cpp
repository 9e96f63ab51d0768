#include "oracles.hpp"

#include <stdexcept>

namespace oracle {

Eigen::Matrix2cd pauli(char label) {
  using cd = std::complex<double>;
  Eigen::Matrix2cd m;
  switch (label) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cd(0, -1), cd(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("bad Pauli label");
  }
  return m;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXcd pauli_word_matrix(const std::string& word) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  for (char c : word) m = kron(m, pauli(c));
  return m;
}

Eigen::MatrixXcd embed(const Eigen::MatrixXcd& op, const std::vector<int>& qubits, int n) {
  const int k = static_cast<int>(qubits.size());
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
  auto sub_index = [&](Eigen::Index full_index) {
    Eigen::Index s = 0;
    for (int j = 0; j < k; ++j) {
      const int bit = static_cast<int>((full_index >> (n - 1 - qubits[j])) & 1);
      s = (s << 1) | bit;
    }
    return s;
  };
  auto rest_bits = [&](Eigen::Index full_index) {
    Eigen::Index rest = full_index;
    for (int j = 0; j < k; ++j) {
      rest &= ~(Eigen::Index{1} << (n - 1 - qubits[j]));
    }
    return rest;
  };
  for (Eigen::Index row = 0; row < dim; ++row) {
    for (Eigen::Index col = 0; col < dim; ++col) {
      if (rest_bits(row) != rest_bits(col)) continue;
      full(row, col) = op(sub_index(row), sub_index(col));
    }
  }
  return full;
}

Eigen::MatrixXcd apply_kraus(const Eigen::MatrixXcd& rho,
                             const std::vector<Eigen::MatrixXcd>& kraus,
                             const std::vector<int>& qubits, int n) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  for (const auto& k : kraus) {
    const Eigen::MatrixXcd full = embed(k, qubits, n);
    out += full * rho * full.adjoint();
  }
  return out;
}

double central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x, int i, double h) {
  Eigen::VectorXd xp = x;
  Eigen::VectorXd xm = x;
  xp(i) += h;
  xm(i) -= h;
  return (f(xp) - f(xm)) / (2.0 * h);
}

}  // namespace oracle
