#include "objective_eval.hpp"

#include <cmath>
#include <stdexcept>

namespace qas::detail {

namespace {

using cd = std::complex<double>;

// rho <- (U on q) rho (U on q)^dag, in place.
void conjugate_1q(Eigen::MatrixXcd& rho, const Eigen::Matrix2cd& u, int q, int n) {
  const std::int64_t dim = std::int64_t{1} << n;
  const std::int64_t bit = std::int64_t{1} << (n - 1 - q);
  const cd u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (std::int64_t col = 0; col < dim; ++col) {
    cd* base = rho.col(col).data();
    for (std::int64_t r = 0; r < dim; ++r) {
      if (r & bit) continue;
      const cd a = base[r];
      const cd b = base[r | bit];
      base[r] = u00 * a + u01 * b;
      base[r | bit] = u10 * a + u11 * b;
    }
  }
  const cd c00 = std::conj(u00), c01 = std::conj(u01), c10 = std::conj(u10),
           c11 = std::conj(u11);
  for (std::int64_t c = 0; c < dim; ++c) {
    if (c & bit) continue;
    cd* lo = rho.col(c).data();
    cd* hi = rho.col(c | bit).data();
    for (std::int64_t r = 0; r < dim; ++r) {
      const cd a = lo[r];
      const cd b = hi[r];
      lo[r] = a * c00 + b * c01;
      hi[r] = a * c10 + b * c11;
    }
  }
}

void apply_1q_vec(Eigen::VectorXcd& v, const Eigen::Matrix2cd& u, int q, int n) {
  const std::int64_t dim = std::int64_t{1} << n;
  const std::int64_t bit = std::int64_t{1} << (n - 1 - q);
  const cd u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  cd* data = v.data();
  for (std::int64_t r = 0; r < dim; ++r) {
    if (r & bit) continue;
    const cd a = data[r];
    const cd b = data[r | bit];
    data[r] = u00 * a + u01 * b;
    data[r | bit] = u10 * a + u11 * b;
  }
}

void conjugate_cnot(Eigen::MatrixXcd& rho, int ctrl, int targ, int n) {
  const std::int64_t dim = std::int64_t{1} << n;
  const std::int64_t cbit = std::int64_t{1} << (n - 1 - ctrl);
  const std::int64_t tbit = std::int64_t{1} << (n - 1 - targ);
  for (std::int64_t col = 0; col < dim; ++col) {
    cd* base = rho.col(col).data();
    for (std::int64_t r = 0; r < dim; ++r) {
      if ((r & cbit) && !(r & tbit)) std::swap(base[r], base[r | tbit]);
    }
  }
  for (std::int64_t c = 0; c < dim; ++c) {
    if (!(c & cbit) || (c & tbit)) continue;
    rho.col(c).swap(rho.col(c | tbit));
  }
}

void apply_cnot_vec(Eigen::VectorXcd& v, int ctrl, int targ, int n) {
  const std::int64_t dim = std::int64_t{1} << n;
  const std::int64_t cbit = std::int64_t{1} << (n - 1 - ctrl);
  const std::int64_t tbit = std::int64_t{1} << (n - 1 - targ);
  cd* data = v.data();
  for (std::int64_t r = 0; r < dim; ++r) {
    if ((r & cbit) && !(r & tbit)) std::swap(data[r], data[r | tbit]);
  }
}

void conjugate_cz(Eigen::MatrixXcd& rho, int a, int b, int n) {
  const std::int64_t dim = std::int64_t{1} << n;
  const std::int64_t abit = std::int64_t{1} << (n - 1 - a);
  const std::int64_t bbit = std::int64_t{1} << (n - 1 - b);
  const std::int64_t both = abit | bbit;
  for (std::int64_t col = 0; col < dim; ++col) {
    cd* base = rho.col(col).data();
    for (std::int64_t r = 0; r < dim; ++r) {
      if ((r & both) == both) base[r] = -base[r];
    }
  }
  for (std::int64_t c = 0; c < dim; ++c) {
    if ((c & both) == both) rho.col(c) = -rho.col(c);
  }
}

void apply_cz_vec(Eigen::VectorXcd& v, int a, int b, int n) {
  const std::int64_t dim = std::int64_t{1} << n;
  const std::int64_t abit = std::int64_t{1} << (n - 1 - a);
  const std::int64_t bbit = std::int64_t{1} << (n - 1 - b);
  const std::int64_t both = abit | bbit;
  for (std::int64_t r = 0; r < dim; ++r) {
    if ((r & both) == both) v(r) = -v(r);
  }
}

Eigen::Matrix2cd rotation_matrix(GateKind kind, double theta) {
  const double t = theta / 2.0;
  Eigen::Matrix2cd m;
  switch (kind) {
    case GateKind::RX:
      m << std::cos(t), cd(0, -std::sin(t)), cd(0, -std::sin(t)), std::cos(t);
      break;
    case GateKind::RY:
      m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
      break;
    case GateKind::RZ:
      m << std::exp(cd(0, -t)), 0, 0, std::exp(cd(0, t));
      break;
    case GateKind::X:
      m << 0, 1, 1, 0;
      break;
    case GateKind::H: {
      const double s = 1.0 / std::sqrt(2.0);
      m << s, s, s, -s;
      break;
    }
    default:
      throw std::logic_error("not a single-qubit gate");
  }
  return m;
}

}  // namespace

CompiledObjective::CompiledObjective(const VariationalProblem& problem, const Circuit& circuit,
                                     const NoiseSpec* noise) {
  n_ = circuit.num_qubits();
  dim_ = Eigen::Index{1} << n_;
  dimension_ = circuit.parameter_count();
  is_vqsd_ = std::holds_alternative<VqsdProblem>(problem);
  const bool noisy = noise != nullptr && noise->has_channels();
  use_ptm_ = noisy;
  if (noisy && n_ > kMaxPtmQubits) {
    throw std::invalid_argument("compiled noisy evaluation capped at 6 qubits");
  }
  shots_ = noise != nullptr ? noise->shots : std::nullopt;

  int next_angle = 0;
  for (const auto& g : circuit.gates()) {
    CompiledOp op;
    op.kind = g.kind;
    op.q0 = g.qubits[0];
    op.q1 = g.qubits.size() > 1 ? g.qubits[1] : -1;
    if (is_rotation(g.kind)) op.angle_index = next_angle++;
    ops_.push_back(op);
  }

  if (is_vqsd_) {
    const VqsdProblem& p = std::get<VqsdProblem>(problem);
    if (p.target.num_qubits() != n_) throw std::invalid_argument("target size mismatch");
    initial_density_ = p.target.to_density();
    purity_cache_ = p.purity_cache;
  } else {
    const VqeProblem& p = std::get<VqeProblem>(problem);
    const PauliHamiltonian& h = *p.hamiltonian;
    if (h.num_qubits() != n_) throw std::invalid_argument("Hamiltonian size mismatch");
    for (const auto& term : h.terms()) {
      TermAction act;
      act.coefficient = term.coefficient;
      act.phase.assign(static_cast<std::size_t>(dim_), 1.0);
      const cd imag(0.0, 1.0);
      for (int q = 0; q < n_; ++q) {
        const char c = term.word[static_cast<std::size_t>(q)];
        const std::int64_t bit = std::int64_t{1} << (n_ - 1 - q);
        if (c == 'X' || c == 'Y') act.xmask |= bit;
        if (c == 'I' || c == 'X') continue;
        for (std::int64_t k = 0; k < dim_; ++k) {
          const bool set = (k & bit) != 0;
          if (c == 'Z') {
            if (set) act.phase[k] = -act.phase[k];
          } else {
            act.phase[k] *= set ? -imag : imag;
          }
        }
      }
      terms_.push_back(std::move(act));
    }
  }

  if (!use_ptm_) {
    rho_buf_.resize(dim_, dim_);
    vec_buf_.resize(dim_);
    return;
  }

  // PTM path: fixed fused matrices for non-rotations, the fused one-qubit
  // noise PTM kept separate for rotations whose angle changes per call.
  auto channels_ptm = [&](const std::vector<KrausChannel>& channels) -> std::optional<Eigen::MatrixXd> {
    if (channels.empty()) return std::nullopt;
    Ptm acc = to_ptm(channels.front());
    for (std::size_t i = 1; i < channels.size(); ++i) acc = fuse(acc, to_ptm(channels[i]));
    return acc.matrix;
  };
  noise_1q_ = channels_ptm(noise->one_qubit_channels);
  const std::optional<Eigen::MatrixXd> noise_2q = channels_ptm(noise->two_qubit_channels);
  for (const auto& op : ops_) {
    if (is_rotation(op.kind)) {
      fixed_ptms_.emplace_back();  // rebuilt per evaluation
      continue;
    }
    Gate g{op.kind, op.q1 >= 0 ? std::vector<int>{op.q0, op.q1} : std::vector<int>{op.q0},
           std::nullopt};
    Eigen::MatrixXd m = to_ptm(gate_matrix(g)).matrix;
    const auto& trailing = is_two_qubit(op.kind) ? noise_2q : noise_1q_;
    if (trailing) m = *trailing * m;
    fixed_ptms_.push_back(std::move(m));
  }

  if (is_vqsd_) {
    initial_pauli_ = density_to_pauli_vector(initial_density_);
  } else {
    Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(dim_, dim_);
    zero(0, 0) = 1.0;
    initial_pauli_ = density_to_pauli_vector(zero);
    const VqeProblem& p = std::get<VqeProblem>(problem);
    for (const auto& term : p.hamiltonian->terms()) {
      std::int64_t index = 0;
      for (int q = 0; q < n_; ++q) {
        const char c = term.word[static_cast<std::size_t>(q)];
        index = index * 4 + (c == 'I' ? 0 : c == 'X' ? 1 : c == 'Y' ? 2 : 3);
      }
      term_indices_.emplace_back(index, term.coefficient);
    }
  }
  pauli_buf_.resize(initial_pauli_.size());
}

double CompiledObjective::finish_vqsd(double measured, std::mt19937_64* rng) const {
  if (shots_) {
    if (rng == nullptr) throw std::invalid_argument("shot-noise model requires an rng");
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(double(*shots_)));
    measured += gauss(*rng);
  }
  return purity_cache_ - measured;
}

double CompiledObjective::evaluate_dense(const Eigen::VectorXd& angles,
                                         std::mt19937_64* rng) const {
  if (is_vqsd_) {
    rho_buf_ = initial_density_;
    for (const auto& op : ops_) {
      switch (op.kind) {
        case GateKind::CNOT: conjugate_cnot(rho_buf_, op.q0, op.q1, n_); break;
        case GateKind::CZ: conjugate_cz(rho_buf_, op.q0, op.q1, n_); break;
        default:
          conjugate_1q(rho_buf_,
                       rotation_matrix(op.kind,
                                       op.angle_index >= 0 ? angles(op.angle_index) : 0.0),
                       op.q0, n_);
      }
    }
    double measured = 0.0;
    for (Eigen::Index i = 0; i < dim_; ++i) {
      const double d = rho_buf_(i, i).real();
      measured += d * d;
    }
    return finish_vqsd(measured, rng);
  }

  vec_buf_.setZero();
  vec_buf_(0) = 1.0;
  for (const auto& op : ops_) {
    switch (op.kind) {
      case GateKind::CNOT: apply_cnot_vec(vec_buf_, op.q0, op.q1, n_); break;
      case GateKind::CZ: apply_cz_vec(vec_buf_, op.q0, op.q1, n_); break;
      default:
        apply_1q_vec(vec_buf_,
                     rotation_matrix(op.kind, op.angle_index >= 0 ? angles(op.angle_index) : 0.0),
                     op.q0, n_);
    }
  }
  double energy = 0.0;
  for (const auto& term : terms_) {
    cd acc = 0.0;
    for (std::int64_t k = 0; k < dim_; ++k) {
      acc += std::conj(vec_buf_(k ^ term.xmask)) * term.phase[k] * vec_buf_(k);
    }
    energy += term.coefficient * acc.real();
  }
  if (shots_) {
    if (rng == nullptr) throw std::invalid_argument("shot-noise model requires an rng");
    double l1 = 0.0;
    for (const auto& term : terms_) l1 += std::abs(term.coefficient);
    std::normal_distribution<double> gauss(0.0, l1 / std::sqrt(double(*shots_)));
    energy += gauss(*rng);
  }
  return energy;
}

double CompiledObjective::evaluate_ptm(const Eigen::VectorXd& angles,
                                       std::mt19937_64* rng) const {
  pauli_buf_ = initial_pauli_;
  Ptm local;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const CompiledOp& op = ops_[i];
    if (is_rotation(op.kind)) {
      local = to_ptm(Eigen::MatrixXcd(rotation_matrix(op.kind, angles(op.angle_index))));
      if (noise_1q_) local.matrix = *noise_1q_ * local.matrix;
      apply_local_ptm(pauli_buf_, local, {op.q0}, n_);
    } else {
      const Ptm fixed{fixed_ptms_[i]};
      if (op.q1 >= 0) {
        apply_local_ptm(pauli_buf_, fixed, {op.q0, op.q1}, n_);
      } else {
        apply_local_ptm(pauli_buf_, fixed, {op.q0}, n_);
      }
    }
  }

  const double root_d = std::sqrt(static_cast<double>(dim_));
  if (is_vqsd_) {
    // Diagonal entries come from the I/Z-only coefficients alone:
    // <b|rho|b> = (1/sqrt(d)) sum_z coeff_z (-1)^{popcount(b & zbits)}.
    double measured = 0.0;
    for (std::int64_t b = 0; b < dim_; ++b) {
      double diag = 0.0;
      for (std::int64_t z = 0; z < dim_; ++z) {
        // Base-4 index whose digits are 0 (I) or 3 (Z) per z's bits.
        std::int64_t index = 0;
        std::int64_t zb = 0;
        for (int q = 0; q < n_; ++q) {
          const std::int64_t bit = std::int64_t{1} << (n_ - 1 - q);
          index *= 4;
          if (z & bit) {
            index += 3;
            zb |= bit;
          }
        }
        const int parity = __builtin_popcountll(b & zb) & 1;
        diag += (parity ? -1.0 : 1.0) * pauli_buf_(index);
      }
      diag /= root_d;
      measured += diag * diag;
    }
    return finish_vqsd(measured, rng);
  }

  double energy = 0.0;
  for (const auto& [index, coeff] : term_indices_) {
    energy += coeff * pauli_buf_(index) * root_d;
  }
  if (shots_) {
    if (rng == nullptr) throw std::invalid_argument("shot-noise model requires an rng");
    double l1 = 0.0;
    for (const auto& [index, coeff] : term_indices_) l1 += std::abs(coeff);
    std::normal_distribution<double> gauss(0.0, l1 / std::sqrt(double(*shots_)));
    energy += gauss(*rng);
  }
  return energy;
}

double CompiledObjective::evaluate(const Eigen::VectorXd& angles, std::mt19937_64* rng) const {
  if (angles.size() != dimension_) {
    throw std::invalid_argument("angle vector dimension mismatch");
  }
  return use_ptm_ ? evaluate_ptm(angles, rng) : evaluate_dense(angles, rng);
}

}  // namespace qas::detail
