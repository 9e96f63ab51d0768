#pragma once

#include "qas/certify.hpp"
#include "qas/env.hpp"
#include "qas/experiment.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qas {

enum class TaskKind { Vqsd, Vqe, Certify, BenchLhea, RandomSearch };

TaskKind task_from_name(const std::string& name);
const char* task_name(TaskKind task);

/// Problem source for the vqsd / vqe / random-search / bench-lhea tasks.
struct ProblemSpec {
  // vqsd-style targets
  std::optional<int> haar_qubits;
  std::uint64_t haar_seed = 0;
  std::optional<int> heisenberg_reduced_spins;
  std::vector<int> heisenberg_keep;
  // vqe sources
  std::optional<std::string> hamiltonian_file;
  std::optional<int> heisenberg_spins;
};

struct ChannelSpec {
  std::string kind;  // identity | depolarizing | amplitude_damping | unitary_circuit | random | composition
  int qubits = 1;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  int rank = 0;
  std::vector<Gate> gates;               // unitary_circuit
  std::vector<ChannelSpec> steps;        // composition
};

struct CertifySpec {
  ChannelSpec ideal;
  ChannelSpec candidate;
  int m = 0;         // 0 = full dimension of the Choi state
  int layers = 3;
  GateKind entangler = GateKind::CNOT;
  double vqsd_threshold = 1e-5;
};

struct BenchLheaSpec {
  int max_layers = 3;
  LheaFlavor flavor = LheaFlavor::RYRZRY_CNOT;
};

struct ExperimentConfig {
  TaskKind task = TaskKind::Vqsd;
  ProblemSpec problem;
  CertifySpec certify;
  BenchLheaSpec bench;
  EnvConfig env;
  AgentConfig agent;
  std::optional<CurriculumConfig> curriculum;
  OptimizeOptions optimizer;
  std::optional<NoiseSpec> noise;
  long episodes = 0;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;

  /// Canonical serialized form used for the manifest hash.
  std::string canonical_json;
};

/// Parses and validates a config document; throws std::invalid_argument
/// with a line of context on any violation (missing file, empty seeds,
/// out-of-range field).
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Instantiates the problem a config describes (loads files, builds
/// reduced states).
VariationalProblem build_problem(const ExperimentConfig& config);

Channel build_channel(const ChannelSpec& spec);

/// FNV-1a over the canonical config text.
std::uint64_t config_hash(const ExperimentConfig& config);

std::string code_version();

}  // namespace qas
