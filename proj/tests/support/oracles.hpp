// Reference implementations used as ground truth in tests. Everything here
// is built from first principles (Kronecker products over explicit
// matrices) and stays independent of the library's simulation kernels.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace oracle {

Eigen::Matrix2cd pauli(char label);  // 'I', 'X', 'Y', 'Z'

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Tensor product of single-qubit Paulis; word[0] acts on the MSB qubit.
Eigen::MatrixXcd pauli_word_matrix(const std::string& word);

/// Embeds a k-qubit operator onto the listed qubits of an n-qubit space
/// (qubit 0 = most significant index bit, qubits[0] = operator MSB).
Eigen::MatrixXcd embed(const Eigen::MatrixXcd& op, const std::vector<int>& qubits, int n);

/// Kraus-sum channel action with explicitly embedded operators.
Eigen::MatrixXcd apply_kraus(const Eigen::MatrixXcd& rho,
                             const std::vector<Eigen::MatrixXcd>& kraus,
                             const std::vector<int>& qubits, int n);

/// Central finite difference of f at x along coordinate i.
double central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x, int i, double h);

}  // namespace oracle
