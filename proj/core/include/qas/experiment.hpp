#pragma once

#include "qas/agent.hpp"
#include "qas/env.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qas {

struct EpisodeLogRow {
  long episode = 0;
  int steps = 0;
  bool success = false;
  double final_cost = 0.0;
  double min_cost = 0.0;
  int gate_count = 0;
  int rotation_count = 0;
  int cnot_count = 0;
  int depth = 0;
  double epsilon = 0.0;
  double threshold = 0.0;
  double wall_time_s = 0.0;
};

/// Fixed episode-log schema; wall_time_s is last so deterministic
/// comparisons can stop before it.
std::string episode_log_header();
std::string episode_log_row(const EpisodeLogRow& row);

struct BestSolution {
  bool found = false;
  double cost = 0.0;        // optimizer-facing value (noisy under a NoiseSpec)
  double exact_cost = 0.0;  // same circuit re-evaluated without noise
  std::vector<Gate> gates;
  std::vector<double> angles;
  long episode = -1;
  bool from_test_phase = false;
};

/// Noise-free evaluation of a recorded solution.
double exact_solution_cost(const VariationalProblem& problem, const std::vector<Gate>& gates,
                           const std::vector<double>& angles);

struct RunConfig {
  long episodes = 0;
  std::uint64_t seed = 0;
  AgentConfig agent;
  EnvConfig env;
  std::optional<CurriculumConfig> curriculum;
  /// Output directory for CSV logs and the checkpoint; empty keeps the run
  /// in memory only.
  std::string out_dir;
  /// Abort the episode loop early once this many successful training
  /// episodes were seen; 0 = never.
  long stop_after_successes = 0;
  /// Abort once the best solution's exact cost drops below this value.
  std::optional<double> stop_when_cost_below;
};

struct RunResult {
  std::vector<EpisodeLogRow> train_log;
  std::vector<EpisodeLogRow> test_log;
  BestSolution best;
  long first_train_success = -1;
  long first_test_success = -1;
  long train_successes = 0;
  long test_successes = 0;
  double final_threshold = 0.0;
};

/// One training episode followed by one greedy test episode per episode
/// index; test transitions never enter the replay buffer and the
/// curriculum (when configured) is fed by the test outcome.
RunResult run_experiment(const VariationalProblem& problem, const RunConfig& config);

/// Continues a checkpointed run up to `episodes`. Appends to existing logs
/// when out_dir matches; the combined log equals an uninterrupted run with
/// the same seed (wall-time column aside).
RunResult resume_experiment(const VariationalProblem& problem, const RunConfig& config,
                            const std::string& checkpoint_path);

/// Same environment loop with uniform-random legal actions instead of a
/// policy; no test phase, same logging schema.
RunResult random_search_baseline(const VariationalProblem& problem, const RunConfig& config);

std::string checkpoint_path(const std::string& out_dir);

}  // namespace qas
