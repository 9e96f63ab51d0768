#include "qas/hamiltonian.hpp"

#include "qas/ptm.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qas {

namespace {

void check_word(const std::string& word, int n) {
  if (static_cast<int>(word.size()) != n) {
    throw std::invalid_argument("Pauli word length differs from qubit count");
  }
  for (char c : word) {
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
      throw std::invalid_argument(std::string("invalid Pauli letter '") + c + "'");
    }
  }
}

std::vector<PauliTerm> merge_terms(std::vector<PauliTerm> terms) {
  std::map<std::string, double> merged;
  std::vector<std::string> order;
  for (auto& t : terms) {
    auto [it, inserted] = merged.try_emplace(t.word, 0.0);
    if (inserted) order.push_back(t.word);
    it->second += t.coefficient;
  }
  std::vector<PauliTerm> out;
  out.reserve(order.size());
  for (const auto& w : order) out.push_back({merged[w], w});
  return out;
}

// P|k> = phase(k) |k ^ xmask>; phase collects Y and Z factors.
struct PauliAction {
  std::int64_t xmask = 0;
  std::vector<std::complex<double>> phase;
};

PauliAction pauli_action(const std::string& word, int n) {
  PauliAction act;
  const std::int64_t dim = std::int64_t{1} << n;
  act.phase.assign(static_cast<std::size_t>(dim), 1.0);
  const std::complex<double> i(0.0, 1.0);
  for (int q = 0; q < n; ++q) {
    const char c = word[static_cast<std::size_t>(q)];
    const std::int64_t bit = std::int64_t{1} << (n - 1 - q);
    if (c == 'X' || c == 'Y') act.xmask |= bit;
    if (c == 'I' || c == 'X') continue;
    for (std::int64_t k = 0; k < dim; ++k) {
      const bool set = (k & bit) != 0;
      if (c == 'Z') {
        if (set) act.phase[k] = -act.phase[k];
      } else {  // Y: |0> -> i|1>, |1> -> -i|0>
        act.phase[k] *= set ? -i : i;
      }
    }
  }
  return act;
}

}  // namespace

PauliHamiltonian::PauliHamiltonian(int n, std::vector<PauliTerm> terms) : n_(n) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("Hamiltonian qubit count out of range");
  for (const auto& t : terms) {
    if (!std::isfinite(t.coefficient)) throw std::invalid_argument("non-finite coefficient");
    check_word(t.word, n);
  }
  terms_ = merge_terms(std::move(terms));
}

double PauliHamiltonian::coefficient_l1() const {
  double s = 0.0;
  for (const auto& t : terms_) s += std::abs(t.coefficient);
  return s;
}

Eigen::MatrixXcd PauliHamiltonian::matrix() const {
  const Eigen::Index d = Eigen::Index{1} << n_;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& t : terms_) {
    std::int64_t index = 0;
    for (int q = 0; q < n_; ++q) {
      const char c = t.word[static_cast<std::size_t>(q)];
      const int label = c == 'I' ? 0 : c == 'X' ? 1 : c == 'Y' ? 2 : 3;
      index = index * 4 + label;
    }
    m += t.coefficient * pauli_product(index, n_);
  }
  return m;
}

PauliHamiltonian parse_hamiltonian(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<PauliTerm> terms;
  int n = -1;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string coeff_tok, word, extra;
    if (!(ls >> coeff_tok)) continue;  // blank
    if (!(ls >> word)) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": missing Pauli word");
    }
    if (ls >> extra) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": trailing token");
    }
    std::size_t pos = 0;
    double coeff = 0.0;
    try {
      coeff = std::stod(coeff_tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != coeff_tok.size()) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": malformed coefficient '" +
                                  coeff_tok + "'");
    }
    if (n == -1) {
      n = static_cast<int>(word.size());
    } else if (static_cast<int>(word.size()) != n) {
      throw std::invalid_argument("line " + std::to_string(lineno) +
                                  ": inconsistent Pauli word length");
    }
    check_word(word, n);
    terms.push_back({coeff, word});
  }
  if (n == -1) throw std::invalid_argument("no Hamiltonian terms found");
  return PauliHamiltonian(n, std::move(terms));
}

PauliHamiltonian load_hamiltonian(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open Hamiltonian file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_hamiltonian(buf.str());
}

PauliHamiltonian heisenberg(int n_spins) {
  if (n_spins < 2 || n_spins % 2 != 0) {
    throw std::invalid_argument("heisenberg requires an even spin count >= 2");
  }
  std::vector<PauliTerm> terms;
  for (int j = 0; j < n_spins; ++j) {
    const int k = (j + 1) % n_spins;
    for (char axis : {'X', 'Y', 'Z'}) {
      std::string word(static_cast<std::size_t>(n_spins), 'I');
      word[static_cast<std::size_t>(j)] = axis;
      word[static_cast<std::size_t>(k)] = axis;
      terms.push_back({1.0 / 3.0, word});
    }
  }
  return PauliHamiltonian(n_spins, std::move(terms));
}

double expectation(const PauliHamiltonian& h, const QuantumState& state,
                   std::optional<std::int64_t> shots, std::mt19937_64* rng) {
  if (h.num_qubits() != state.num_qubits()) {
    throw std::invalid_argument("Hamiltonian and state qubit counts differ");
  }
  const int n = h.num_qubits();
  const std::int64_t dim = std::int64_t{1} << n;
  double value = 0.0;
  if (!state.is_density()) {
    const auto& v = state.vector();
    for (const auto& t : h.terms()) {
      const PauliAction act = pauli_action(t.word, n);
      std::complex<double> acc = 0.0;
      for (std::int64_t k = 0; k < dim; ++k) {
        acc += std::conj(v(k ^ act.xmask)) * act.phase[k] * v(k);
      }
      value += t.coefficient * acc.real();
    }
  } else {
    const auto& rho = state.density_view();
    for (const auto& t : h.terms()) {
      const PauliAction act = pauli_action(t.word, n);
      // Tr(P rho) = sum_k phase(k) rho(k, k ^ x) with P|k> = phase(k)|k ^ x>.
      std::complex<double> acc = 0.0;
      for (std::int64_t k = 0; k < dim; ++k) {
        acc += act.phase[k] * rho(k, k ^ act.xmask);
      }
      value += t.coefficient * acc.real();
    }
  }
  if (shots) {
    if (*shots <= 0) throw std::invalid_argument("shot count must be positive");
    if (rng == nullptr) throw std::invalid_argument("shot-noise model requires an rng");
    std::normal_distribution<double> gauss(0.0, h.coefficient_l1() / std::sqrt(double(*shots)));
    value += gauss(*rng);
  }
  return value;
}

Spectrum exact_spectrum(const PauliHamiltonian& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.matrix());
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  return Spectrum{es.eigenvalues(), es.eigenvectors()};
}

double fake_min_energy(const PauliHamiltonian& h) {
  const std::string identity(static_cast<std::size_t>(h.num_qubits()), 'I');
  double offset = 0.0;
  double l1 = 0.0;
  for (const auto& t : h.terms()) {
    if (t.word == identity) {
      offset = t.coefficient;
    } else {
      l1 += std::abs(t.coefficient);
    }
  }
  return offset - l1;
}

}  // namespace qas
