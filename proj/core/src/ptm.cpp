#include "qas/ptm.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>

namespace qas {

int Ptm::n_qubits() const {
  int k = 0;
  while ((Eigen::Index{1} << (2 * k)) < dim()) ++k;
  return k;
}

Eigen::Matrix2cd pauli_matrix(int label) {
  using cd = std::complex<double>;
  Eigen::Matrix2cd m;
  switch (label) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, cd(0, -1), cd(0, 1), 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("Pauli label must be 0..3");
  }
  return m;
}

namespace {

Eigen::MatrixXcd build_pauli_product(std::int64_t index, int k) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  // Qubit 0 owns the most significant base-4 digit and the leftmost
  // Kronecker factor.
  for (int q = 0; q < k; ++q) {
    const int label = static_cast<int>((index >> (2 * (k - 1 - q))) & 3);
    const Eigen::Matrix2cd p = pauli_matrix(label);
    Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        next.block(2 * i, 2 * j, 2, 2) = out(i, j) * p;
      }
    }
    out = std::move(next);
  }
  return out;
}

// The one- and two-qubit products appear in every PTM conversion; keep
// them in a table.
const std::vector<Eigen::MatrixXcd>& pauli_table(int k) {
  static const std::vector<Eigen::MatrixXcd> one = [] {
    std::vector<Eigen::MatrixXcd> t;
    for (std::int64_t i = 0; i < 4; ++i) t.push_back(build_pauli_product(i, 1));
    return t;
  }();
  static const std::vector<Eigen::MatrixXcd> two = [] {
    std::vector<Eigen::MatrixXcd> t;
    for (std::int64_t i = 0; i < 16; ++i) t.push_back(build_pauli_product(i, 2));
    return t;
  }();
  return k == 1 ? one : two;
}

}  // namespace

Eigen::MatrixXcd pauli_product(std::int64_t index, int k) {
  if (k == 1 || k == 2) return pauli_table(k)[static_cast<std::size_t>(index)];
  return build_pauli_product(index, k);
}

namespace {

int qubits_for_operator_dim(Eigen::Index d) {
  if (d == 2) return 1;
  if (d == 4) return 2;
  throw std::invalid_argument("PTM conversion supports dimension 2 or 4 only");
}

Ptm ptm_from_action(int k, const std::function<Eigen::MatrixXcd(const Eigen::MatrixXcd&)>& act) {
  const std::int64_t count = std::int64_t{1} << (2 * k);
  const double norm = static_cast<double>(Eigen::Index{1} << k);
  Ptm r;
  r.matrix.resize(count, count);
  for (std::int64_t j = 0; j < count; ++j) {
    const Eigen::MatrixXcd image = act(pauli_product(j, k));
    for (std::int64_t i = 0; i < count; ++i) {
      const std::complex<double> tr = (pauli_product(i, k) * image).trace();
      if (std::abs(tr.imag()) > 1e-12) {
        throw std::runtime_error("PTM entry has a non-real trace");
      }
      r.matrix(i, j) = tr.real() / norm;
    }
  }
  return r;
}

}  // namespace

Ptm to_ptm(const Eigen::MatrixXcd& unitary) {
  const int k = qubits_for_operator_dim(unitary.rows());
  return ptm_from_action(k, [&](const Eigen::MatrixXcd& p) -> Eigen::MatrixXcd {
    return unitary * p * unitary.adjoint();
  });
}

Ptm to_ptm(const KrausChannel& channel) {
  return ptm_from_action(channel.n_qubits, [&](const Eigen::MatrixXcd& p) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(p.rows(), p.cols());
    for (const auto& op : channel.operators) out += op * p * op.adjoint();
    return out;
  });
}

Ptm fuse(const Ptm& gate_ptm, const Ptm& noise_ptm) {
  if (gate_ptm.dim() != noise_ptm.dim()) {
    throw std::invalid_argument("fuse: PTM dimensions differ");
  }
  return Ptm{noise_ptm.matrix * gate_ptm.matrix};
}

Eigen::VectorXd density_to_pauli_vector(const Eigen::MatrixXcd& rho) {
  const int n = [&] {
    int k = 0;
    while ((Eigen::Index{1} << k) < rho.rows()) ++k;
    return k;
  }();
  const std::int64_t count = std::int64_t{1} << (2 * n);
  const double norm = std::sqrt(static_cast<double>(rho.rows()));
  Eigen::VectorXd c(count);
  for (std::int64_t a = 0; a < count; ++a) {
    c(a) = (pauli_product(a, n) * rho).trace().real() / norm;
  }
  return c;
}

Eigen::MatrixXcd pauli_vector_to_density(const Eigen::VectorXd& coeffs, int n) {
  const Eigen::Index d = Eigen::Index{1} << n;
  const double norm = std::sqrt(static_cast<double>(d));
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  for (std::int64_t a = 0; a < coeffs.size(); ++a) {
    if (coeffs(a) == 0.0) continue;
    rho += (coeffs(a) / norm) * pauli_product(a, n);
  }
  return rho;
}

void apply_local_ptm(Eigen::VectorXd& coeffs, const Ptm& ptm, const std::vector<int>& qubits,
                     int n) {
  const int k = static_cast<int>(qubits.size());
  const std::int64_t sub = std::int64_t{1} << (2 * k);
  if (ptm.dim() != sub) throw std::invalid_argument("local PTM dimension mismatch");

  // Base-4 digit shifts; qubit 0 owns the most significant digit.
  std::vector<int> shift(qubits.size());
  for (int j = 0; j < k; ++j) shift[j] = 2 * (n - 1 - qubits[j]);

  const std::int64_t dim = coeffs.size();
  std::int64_t mask = 0;
  for (int j = 0; j < k; ++j) mask |= std::int64_t{3} << shift[j];

  Eigen::VectorXd scratch(sub);
  std::vector<std::int64_t> idx(sub);
  for (std::int64_t base = 0; base < dim; ++base) {
    if ((base & mask) != 0) continue;
    for (std::int64_t s = 0; s < sub; ++s) {
      std::int64_t full = base;
      for (int j = 0; j < k; ++j) {
        full |= ((s >> (2 * (k - 1 - j))) & 3) << shift[j];
      }
      idx[s] = full;
    }
    for (std::int64_t s = 0; s < sub; ++s) scratch(s) = coeffs(idx[s]);
    scratch = ptm.matrix * scratch;
    for (std::int64_t s = 0; s < sub; ++s) coeffs(idx[s]) = scratch(s);
  }
}

QuantumState ptm_evolve(const Circuit& circuit, const QuantumState& input,
                        const NoiseSpec& noise) {
  const int n = circuit.num_qubits();
  if (n > kMaxPtmQubits) {
    throw std::invalid_argument("ptm_evolve supports at most " +
                                std::to_string(kMaxPtmQubits) + " qubits");
  }
  if (n != input.num_qubits()) {
    throw std::invalid_argument("circuit and state qubit counts differ");
  }

  // Fused (gate, trailing noise) PTMs cached per evaluation, keyed by the
  // exact gate parameters.
  std::map<std::tuple<GateKind, double>, Ptm> cache;
  std::optional<Ptm> noise_1q, noise_2q;
  auto noise_ptm = [&](bool two_qubit) -> const Ptm* {
    auto& slot = two_qubit ? noise_2q : noise_1q;
    const auto& channels = two_qubit ? noise.two_qubit_channels : noise.one_qubit_channels;
    if (channels.empty()) return nullptr;
    if (!slot) {
      Ptm acc = to_ptm(channels.front());
      for (std::size_t i = 1; i < channels.size(); ++i) {
        acc = fuse(acc, to_ptm(channels[i]));
      }
      slot = std::move(acc);
    }
    return &*slot;
  };

  Eigen::VectorXd coeffs = density_to_pauli_vector(input.to_density());
  for (const auto& g : circuit.gates()) {
    const auto key = std::make_tuple(g.kind, g.angle.value_or(0.0));
    auto it = cache.find(key);
    if (it == cache.end()) {
      Ptm fused = to_ptm(gate_matrix(g));
      if (const Ptm* np = noise_ptm(is_two_qubit(g.kind))) {
        fused = fuse(fused, *np);
      }
      it = cache.emplace(key, std::move(fused)).first;
    }
    apply_local_ptm(coeffs, it->second, g.qubits, n);
  }
  return QuantumState::from_density(pauli_vector_to_density(coeffs, n));
}

}  // namespace qas
