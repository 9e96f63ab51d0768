#include "qas/vqa.hpp"

#include "qas/ptm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qas {

VqsdProblem VqsdProblem::make(QuantumState target_state) {
  QuantumState target = target_state.promoted();
  target.validate();
  const double p = purity(target);
  return VqsdProblem{std::move(target), p};
}

VqeProblem VqeProblem::make(PauliHamiltonian h, bool with_oracle_energy) {
  VqeProblem p{std::make_shared<PauliHamiltonian>(std::move(h)), std::nullopt, 0.0};
  p.fake_min = fake_min_energy(*p.hamiltonian);
  if (with_oracle_energy) {
    p.ground_truth = exact_spectrum(*p.hamiltonian).eigenvalues(0);
  }
  return p;
}

namespace {

QuantumState evolve_for_cost(const Circuit& bound, const QuantumState& input,
                             const NoiseSpec* noise) {
  if (noise != nullptr && noise->has_channels() && bound.num_qubits() <= kMaxPtmQubits) {
    return ptm_evolve(bound, input, *noise);
  }
  return run_circuit(bound, input, noise);
}

}  // namespace

double vqsd_cost(const VqsdProblem& problem, const Circuit& circuit,
                 const std::vector<double>& angles, const NoiseSpec* noise,
                 std::mt19937_64* rng) {
  const Circuit bound = circuit.bind_angles(angles);
  const QuantumState evolved = evolve_for_cost(bound, problem.target, noise);
  double measured = 0.0;
  for (double p : diagonal_elements(evolved)) measured += p * p;
  if (noise != nullptr && noise->shots) {
    if (rng == nullptr) throw std::invalid_argument("shot-noise model requires an rng");
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(double(*noise->shots)));
    measured += gauss(*rng);
  }
  return problem.purity_cache - measured;
}

double vqe_energy(const VqeProblem& problem, const Circuit& circuit,
                  const std::vector<double>& angles, const NoiseSpec* noise,
                  std::mt19937_64* rng) {
  if (problem.hamiltonian->num_qubits() != circuit.num_qubits()) {
    throw std::invalid_argument("Hamiltonian and circuit qubit counts differ");
  }
  const Circuit bound = circuit.bind_angles(angles);
  const QuantumState initial(circuit.num_qubits());
  const bool noisy = noise != nullptr && noise->has_channels();
  const QuantumState evolved =
      noisy ? evolve_for_cost(bound, initial.promoted(), noise) : run_circuit(bound, initial);
  const auto shots = noise != nullptr ? noise->shots : std::nullopt;
  return expectation(*problem.hamiltonian, evolved, shots, rng);
}

std::pair<std::vector<double>, std::vector<std::uint64_t>> eigen_readout(
    const VqsdProblem& problem, const Circuit& circuit, const std::vector<double>& angles) {
  const Circuit bound = circuit.bind_angles(angles);
  const QuantumState evolved = run_circuit(bound, problem.target);
  const std::vector<double> diag = diagonal_elements(evolved);
  std::vector<std::uint64_t> order(diag.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint64_t a, std::uint64_t b) { return diag[a] > diag[b]; });
  std::vector<double> values(diag.size());
  for (std::size_t i = 0; i < order.size(); ++i) values[i] = diag[order[i]];
  return {std::move(values), std::move(order)};
}

QuantumState eigenvector_prepare(const Circuit& circuit, const std::vector<double>& angles,
                                 const std::vector<int>& bitstring) {
  if (static_cast<int>(bitstring.size()) != circuit.num_qubits()) {
    throw std::invalid_argument("bitstring length differs from qubit count");
  }
  std::uint64_t index = 0;
  for (int b : bitstring) {
    if (b != 0 && b != 1) throw std::invalid_argument("bitstring entries must be 0 or 1");
    index = (index << 1) | static_cast<std::uint64_t>(b);
  }
  const QuantumState basis = QuantumState::basis_state(circuit.num_qubits(), index);
  const Circuit inverse = circuit.bind_angles(angles).inverse();
  return run_circuit(inverse, basis);
}

double eigenvalue_error(const std::vector<double>& true_vals, const std::vector<double>& inferred,
                        int m) {
  if (m < 0 || m > static_cast<int>(true_vals.size()) ||
      m > static_cast<int>(inferred.size())) {
    throw std::out_of_range("eigenvalue_error: m out of range");
  }
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double d = true_vals[static_cast<std::size_t>(i)] - inferred[static_cast<std::size_t>(i)];
    s += d * d;
  }
  return s;
}

LheaFlavor lhea_flavor_from_name(const std::string& name) {
  if (name == "RYCZ") return LheaFlavor::RYCZ;
  if (name == "RZRX_CNOT") return LheaFlavor::RZRX_CNOT;
  if (name == "RYRZRY_CNOT") return LheaFlavor::RYRZRY_CNOT;
  throw std::invalid_argument("unknown LHEA flavor: " + name);
}

Circuit build_lhea(int n, const LheaSpec& spec) {
  if (n < 2) throw std::invalid_argument("LHEA needs at least 2 qubits");
  if (spec.layers < 1) throw std::invalid_argument("LHEA needs at least 1 layer");
  std::vector<std::pair<int, int>> pairs = spec.connectivity;
  if (pairs.empty()) {
    for (int q = 0; q + 1 < n; ++q) pairs.emplace_back(q, q + 1);
  }
  Circuit c(n);
  auto rotations = [&](GateKind kind, int a, int b) {
    c.append(Gate{kind, {a}, 0.0});
    c.append(Gate{kind, {b}, 0.0});
  };
  for (int layer = 0; layer < spec.layers; ++layer) {
    for (const auto& [a, b] : pairs) {
      switch (spec.flavor) {
        case LheaFlavor::RYCZ:
          rotations(GateKind::RY, a, b);
          c.append(Gate::cz(a, b));
          rotations(GateKind::RY, a, b);
          break;
        case LheaFlavor::RZRX_CNOT:
          rotations(GateKind::RZ, a, b);
          rotations(GateKind::RX, a, b);
          c.append(Gate::cnot(a, b));
          rotations(GateKind::RZ, a, b);
          rotations(GateKind::RX, a, b);
          break;
        case LheaFlavor::RYRZRY_CNOT:
          rotations(GateKind::RY, a, b);
          rotations(GateKind::RZ, a, b);
          rotations(GateKind::RY, a, b);
          c.append(Gate::cnot(a, b));
          rotations(GateKind::RY, a, b);
          rotations(GateKind::RZ, a, b);
          rotations(GateKind::RY, a, b);
          break;
      }
    }
  }
  return c;
}

}  // namespace qas
