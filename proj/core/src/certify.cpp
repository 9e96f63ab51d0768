#include "qas/certify.hpp"

#include "qas/ptm.hpp"
#include "qas/random.hpp"
#include "qas/vqa.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace qas {

namespace {

std::atomic<long> g_clip_warnings{0};

constexpr int kMaxChoiChannelQubits = 3;

Eigen::MatrixXcd sqrt_psd(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < -1e-9) {
    throw std::invalid_argument("matrix is not PSD within tolerance");
  }
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

double clipped_sqrt(double radicand) {
  if (radicand < 0.0) {
    if (radicand < -1e-12) g_clip_warnings.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  return std::sqrt(radicand);
}

}  // namespace

Channel Channel::identity(int n) {
  if (n < 1 || n > kMaxChoiChannelQubits) {
    throw std::invalid_argument("channel size out of range (1 to 3 qubits)");
  }
  Channel ch;
  ch.n = n;
  ch.kraus.push_back(Eigen::MatrixXcd::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n));
  return ch;
}

Channel Channel::from_unitary(const Eigen::MatrixXcd& u) {
  Channel ch;
  ch.n = 0;
  while ((Eigen::Index{1} << ch.n) < u.rows()) ++ch.n;
  if ((Eigen::Index{1} << ch.n) != u.rows() || u.rows() != u.cols()) {
    throw std::invalid_argument("unitary dimension must be a power of two");
  }
  ch.kraus.push_back(u);
  ch.validate();
  return ch;
}

Channel Channel::from_circuit(const Circuit& circuit) {
  const Eigen::Index d = Eigen::Index{1} << circuit.num_qubits();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(d, d);
  for (const auto& g : circuit.gates()) {
    u = apply_matrix_left(u, gate_matrix(g), g.qubits, circuit.num_qubits());
  }
  return from_unitary(u);
}

Channel Channel::from_kraus(int n, std::vector<Eigen::MatrixXcd> operators) {
  Channel ch;
  ch.n = n;
  ch.kraus = std::move(operators);
  ch.validate();
  return ch;
}

Channel Channel::from_local(const KrausChannel& local, int n) {
  if (local.n_qubits != 1) throw std::invalid_argument("from_local expects a 1-qubit channel");
  Channel out = identity(n);
  for (int q = 0; q < n; ++q) {
    std::vector<Eigen::MatrixXcd> next;
    for (const auto& prev : out.kraus) {
      for (const auto& k : local.operators) {
        const Eigen::Index d = Eigen::Index{1} << n;
        Eigen::MatrixXcd embedded = Eigen::MatrixXcd::Identity(d, d);
        embedded = apply_matrix_left(embedded, k, {q}, n);
        next.push_back(embedded * prev);
      }
    }
    out.kraus = std::move(next);
  }
  out.validate();
  return out;
}

Channel Channel::composition(const std::vector<Channel>& steps) {
  if (steps.empty()) throw std::invalid_argument("empty channel composition");
  Channel out = steps.front();
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].n != out.n) throw std::invalid_argument("composition arity mismatch");
    std::vector<Eigen::MatrixXcd> next;
    for (const auto& b : steps[i].kraus) {
      for (const auto& a : out.kraus) {
        Eigen::MatrixXcd k = b * a;
        if (k.cwiseAbs().maxCoeff() > 0.0) next.push_back(std::move(k));
      }
    }
    out.kraus = std::move(next);
  }
  out.validate();
  return out;
}

Channel Channel::random(int n, int rank, std::mt19937_64& rng) {
  const Eigen::Index d = Eigen::Index{1} << n;
  if (rank < 1 || rank > d * d) throw std::invalid_argument("channel rank out of range");
  // Stinespring: V = first d columns of a Haar unitary on (d * rank),
  // K_e = (I (x) <e|) V with system-major row indexing.
  const Eigen::MatrixXcd u = haar_unitary(d * rank, rng);
  Channel ch;
  ch.n = n;
  for (int e = 0; e < rank; ++e) {
    Eigen::MatrixXcd k(d, d);
    for (Eigen::Index s_out = 0; s_out < d; ++s_out) {
      for (Eigen::Index s_in = 0; s_in < d; ++s_in) {
        k(s_out, s_in) = u(s_out * rank + e, s_in);
      }
    }
    ch.kraus.push_back(std::move(k));
  }
  ch.validate();
  return ch;
}

Eigen::MatrixXcd Channel::apply(const Eigen::MatrixXcd& rho) const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  for (const auto& k : kraus) out += k * rho * k.adjoint();
  return out;
}

void Channel::validate() const {
  if (n < 1 || n > kMaxChoiChannelQubits) {
    throw std::invalid_argument("channel size out of range (1 to 3 qubits)");
  }
  const Eigen::Index d = Eigen::Index{1} << n;
  if (kraus.empty()) throw std::invalid_argument("channel has no Kraus operators");
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& k : kraus) {
    if (k.rows() != d || k.cols() != d) throw std::invalid_argument("Kraus dimension mismatch");
    sum += k.adjoint() * k;
  }
  if ((sum - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("channel violates CPTP completeness beyond 1e-12");
  }
}

QuantumState choi_state(const Channel& channel) {
  channel.validate();
  const Eigen::Index d = Eigen::Index{1} << channel.n;
  Eigen::MatrixXcd choi = Eigen::MatrixXcd::Zero(d * d, d * d);
  // (1/d) sum_ij |i><j| (x) Phi(|i><j|); reference register owns the
  // most significant index block.
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(d, d);
      e(i, j) = 1.0;
      const Eigen::MatrixXcd mapped = channel.apply(e);
      choi.block(i * d, j * d, d, d) = mapped / static_cast<double>(d);
    }
  }
  return QuantumState::from_density(std::move(choi));
}

double fidelity_exact(const QuantumState& rho, const QuantumState& sigma) {
  const Eigen::MatrixXcd a = rho.to_density();
  const Eigen::MatrixXcd b = sigma.to_density();
  if (a.rows() != b.rows()) throw std::invalid_argument("fidelity: dimension mismatch");
  const Eigen::MatrixXcd sa = sqrt_psd(a);
  const Eigen::MatrixXcd inner = sa * b * sa;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(inner, Eigen::EigenvaluesOnly);
  double f = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    f += std::sqrt(std::max(es.eigenvalues()(i), 0.0));
  }
  return f;
}

double subfidelity(const QuantumState& rho, const QuantumState& sigma) {
  const Eigen::MatrixXcd a = rho.to_density();
  const Eigen::MatrixXcd b = sigma.to_density();
  if (a.rows() != b.rows()) throw std::invalid_argument("subfidelity: dimension mismatch");
  const Eigen::MatrixXcd ab = a * b;
  const double tr_ab = ab.trace().real();
  const double tr_abab = (ab * ab).trace().real();
  return tr_ab + clipped_sqrt(2.0 * (tr_ab * tr_ab - tr_abab));
}

double superfidelity(const QuantumState& rho, const QuantumState& sigma) {
  const Eigen::MatrixXcd a = rho.to_density();
  const Eigen::MatrixXcd b = sigma.to_density();
  if (a.rows() != b.rows()) throw std::invalid_argument("superfidelity: dimension mismatch");
  const double tr_ab = (a * b).trace().real();
  const double pa = (a * a).trace().real();
  const double pb = (b * b).trace().real();
  return tr_ab + clipped_sqrt((1.0 - pa) * (1.0 - pb));
}

long fidelity_clip_warnings() { return g_clip_warnings.load(std::memory_order_relaxed); }

FidelityBounds truncated_bounds(const std::vector<double>& eigenvalues,
                                const std::vector<Eigen::VectorXcd>& eigenvectors,
                                const QuantumState& sigma, int m) {
  if (m < 1) throw std::invalid_argument("truncated_bounds: m must be >= 1");
  if (m > static_cast<int>(eigenvalues.size()) || m > static_cast<int>(eigenvectors.size())) {
    throw std::invalid_argument("truncated_bounds: m exceeds available eigenpairs");
  }
  for (int i = 0; i < m; ++i) {
    if (eigenvalues[static_cast<std::size_t>(i)] < -1e-12) {
      throw std::invalid_argument("truncated_bounds: negative eigenvalue");
    }
  }
  const Eigen::MatrixXcd s = sigma.to_density();

  Eigen::MatrixXcd t(m, m);
  double sum_r = 0.0;
  double sum_sigma_diag = 0.0;
  for (int i = 0; i < m; ++i) {
    const double ri = std::max(eigenvalues[static_cast<std::size_t>(i)], 0.0);
    sum_r += ri;
    const Eigen::VectorXcd si = s * eigenvectors[static_cast<std::size_t>(i)];
    sum_sigma_diag += eigenvectors[static_cast<std::size_t>(i)].dot(si).real();
    for (int j = 0; j < m; ++j) {
      const double rj = std::max(eigenvalues[static_cast<std::size_t>(j)], 0.0);
      t(i, j) = std::sqrt(ri * rj) * eigenvectors[static_cast<std::size_t>(i)].dot(
                                         s * eigenvectors[static_cast<std::size_t>(j)]);
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t, Eigen::EigenvaluesOnly);
  double lower = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    lower += std::sqrt(std::max(es.eigenvalues()(i), 0.0));
  }
  FidelityBounds out;
  out.m = m;
  out.convention = FidelityConvention::SqrtFidelity;
  out.lower = lower;
  out.upper = lower + clipped_sqrt((1.0 - sum_r) * (1.0 - sum_sigma_diag));
  return out;
}

VqsdEngine lhea_vqsd_engine(int layers, GateKind entangler, const OptimizeOptions& options,
                            double threshold) {
  if (entangler != GateKind::CNOT && entangler != GateKind::CZ) {
    throw std::invalid_argument("entangler must be CNOT or CZ");
  }
  return [layers, entangler, options, threshold](const QuantumState& target,
                                                 std::mt19937_64& rng,
                                                 const NoiseSpec* noise) -> DiagonalizationResult {
    const int n = target.num_qubits();
    Circuit ansatz(n);
    auto rotation_layer = [&] {
      for (int q = 0; q < n; ++q) {
        ansatz.append(Gate::ry(q, 0.0));
        ansatz.append(Gate::rz(q, 0.0));
      }
    };
    for (int l = 0; l < layers; ++l) {
      rotation_layer();
      for (int q = 0; q + 1 < n; ++q) {
        ansatz.append(entangler == GateKind::CNOT ? Gate::cnot(q, q + 1) : Gate::cz(q, q + 1));
      }
    }
    rotation_layer();

    const VqsdProblem problem = VqsdProblem::make(target);
    OptimizeOptions per_try = options;
    per_try.restarts = 1;
    per_try.init_hints.clear();
    DiagonalizationResult result{ansatz, {}, std::numeric_limits<double>::infinity(), false};
    const int tries = std::max(1, options.restarts);
    for (int t = 0; t < tries; ++t) {
      const OptimResult opt =
          optimize_angles(VariationalProblem{problem}, ansatz, per_try, rng, noise);
      if (opt.best_value < result.cost) {
        result.cost = opt.best_value;
        result.angles.assign(opt.best_point.data(), opt.best_point.data() + opt.best_point.size());
      }
      if (result.cost < threshold) break;
    }
    result.threshold_met = result.cost < threshold;
    return result;
  };
}

std::string CertifyReport::to_json() const {
  nlohmann::json j;
  j["m"] = m;
  j["inferred_eigenvalues"] = inferred_eigenvalues;
  j["bounds_per_m"] = nlohmann::json::array();
  for (const auto& b : bounds_per_m) {
    j["bounds_per_m"].push_back({{"m", b.m},
                                 {"lower", b.lower},
                                 {"upper", b.upper},
                                 {"convention", "sqrt_fidelity"}});
  }
  j["subfidelity"] = subfidelity_value;
  j["superfidelity"] = superfidelity_value;
  j["ssfb_convention"] = "squared_fidelity";
  j["exact_fidelity"] = exact_fidelity;
  j["truncated_fidelity_error"] = truncated_fidelity_error;
  j["vqsd_cost"] = vqsd_cost;
  j["vqsd_threshold_met"] = vqsd_threshold_met;
  return j.dump(2);
}

CertifyReport certify(const Channel& ideal, const Channel& candidate, const VqsdEngine& engine,
                      int m, std::mt19937_64& rng, const NoiseSpec* noise) {
  if (ideal.n != candidate.n) throw std::invalid_argument("certify: channel sizes differ");
  const QuantumState j_ideal = choi_state(ideal);
  const QuantumState j_cand = choi_state(candidate);
  const int nq = j_ideal.num_qubits();
  const Eigen::Index dim = j_ideal.dim();
  if (m < 1 || m > dim) throw std::invalid_argument("certify: truncation rank out of range");

  DiagonalizationResult diag = engine(j_ideal, rng, noise);
  const Circuit bound = diag.circuit.bind_angles(diag.angles);

  // Eigenvalue readout runs through the same (possibly noisy) circuit.
  const QuantumState evolved = noise != nullptr && noise->has_channels()
                                   ? ptm_evolve(bound, j_ideal, *noise)
                                   : run_circuit(bound, j_ideal);
  std::vector<double> diag_elems = diagonal_elements(evolved);
  std::vector<std::uint64_t> order(diag_elems.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    return diag_elems[a] > diag_elems[b];
  });

  CertifyReport report;
  report.m = m;
  report.vqsd_cost = diag.cost;
  report.vqsd_threshold_met = diag.threshold_met;

  std::vector<double> eigenvalues;
  std::vector<Eigen::VectorXcd> eigenvectors;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const std::uint64_t index = order[static_cast<std::size_t>(i)];
    eigenvalues.push_back(std::max(diag_elems[index], 0.0));
    std::vector<int> bits(static_cast<std::size_t>(nq));
    for (int b = 0; b < nq; ++b) {
      bits[static_cast<std::size_t>(b)] = static_cast<int>((index >> (nq - 1 - b)) & 1);
    }
    eigenvectors.push_back(eigenvector_prepare(diag.circuit, diag.angles, bits).vector());
  }
  report.inferred_eigenvalues.assign(eigenvalues.begin(), eigenvalues.begin() + m);

  for (int mm = 1; mm <= m; ++mm) {
    report.bounds_per_m.push_back(truncated_bounds(eigenvalues, eigenvectors, j_cand, mm));
  }
  report.subfidelity_value = subfidelity(j_ideal, j_cand);
  report.superfidelity_value = superfidelity(j_ideal, j_cand);
  report.exact_fidelity = fidelity_exact(j_ideal, j_cand);
  report.truncated_fidelity_error = report.bounds_per_m.back().lower - report.exact_fidelity;
  return report;
}

}  // namespace qas
