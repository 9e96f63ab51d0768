#pragma once

#include "qas/circuit.hpp"
#include "qas/optimize.hpp"
#include "qas/vqa.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace qas {

/// Binary tensor of shape T x (N+3) x N encoding a circuit depth-wise.
/// Slice rows 0..N-1 hold CNOT placements (row = target, column = control);
/// row N+j-1 holds an axis-j rotation on the column's qubit. An optional
/// trailing scalar channel carries the last cost value.
struct Observation {
  int max_depth = 0;  // T
  int qubits = 0;     // N
  std::vector<std::uint8_t> tensor;  // T * (N+3) * N entries
  std::optional<double> appended_cost;

  std::uint8_t& at(int slice, int row, int col);
  std::uint8_t at(int slice, int row, int col) const;
  int nonzero_slices() const;

  /// Flat network input: tensor entries as 0/1 followed by the appended
  /// cost when present.
  std::vector<double> flatten() const;
  int flat_size() const;
};

/// Gate choice encoded as four integers:
///   CNOT:     [ctrl, offset, N, N], target = (ctrl + offset) mod N
///   rotation: [N, N, qubit, axis],  axis 1 = X, 2 = Y, 3 = Z
struct Action {
  std::array<int, 4> code{};

  bool is_rotation(int n) const { return code[0] == n; }
  int ctrl() const { return code[0]; }
  int offset() const { return code[1]; }
  int target(int n) const { return (code[0] + code[1]) % n; }
  int rot_qubit() const { return code[2]; }
  int rot_axis() const { return code[3]; }

  bool operator==(const Action& o) const { return code == o.code; }

  Gate to_gate(int n) const;
};

/// 3N rotations + N(N-1) CNOTs.
int action_count(int n);

/// Fixed enumeration: rotations first (qubit-major, axis-minor), then
/// CNOTs (control-major, offset-minor). Bijective with action codes.
Action decode_action(int index, int n);
int encode_action(const Action& action, int n);

/// Appends the circuit's gates into the depth-slice tensor: a rotation on
/// qubit q with axis j lands in slice moment(q), row N+j-1, column q; a
/// CNOT(c, t) lands in slice max(moment(c), moment(t)), row t, column c,
/// then advances both moments past that slice.
Observation encode(const Circuit& circuit, int max_depth, int n);

/// Tracks the gates whose immediate repetition would cancel to identity.
/// A new gate clears every tracked entry sharing a qubit with it, then
/// becomes tracked itself, so the set holds at most N entries and an
/// action is illegal exactly while it is tracked.
class IllegalActionTracker {
 public:
  explicit IllegalActionTracker(int n) : n_(n) {}

  void on_action(const Action& action);
  void reset() { tracked_.clear(); }
  bool is_illegal(const Action& action) const;
  const std::vector<Action>& tracked() const { return tracked_; }

 private:
  int n_;
  std::vector<Action> tracked_;
};

/// Mask over action indices after replaying `history`; true = legal.
std::vector<bool> legal_mask(const std::vector<Action>& history, int n);

/// +R when cost < zeta + 1e-5 (success branch takes precedence), else
/// -ln(cost - zeta).
double reward_dense(double cost, double zeta, double success_bonus);

/// 5 if cost_t < zeta; -5 if t >= max_steps and cost_t >= zeta; otherwise
/// max((cost_prev - cost_t)/(cost_prev - e_min), -1), with a degenerate
/// denominator collapsing to -1.
double reward_sparse(double cost_t, double cost_prev, int t, int max_steps, double zeta,
                     double e_min);

/// n_s plus a NegBinom(n_s, p) failure count; mean n_s / p. p = 1 always
/// returns n_s.
int sample_episode_length(double p, int n_s, std::mt19937_64& rng);

struct CurriculumConfig {
  double initial_threshold = 0.005;  // xi_1
  double amortization = 1e-4;        // delta
  double amortization_decrement = 1e-5;  // applied to delta per 50 solves
  double shift_radius = 1.0;         // kappa
  int greedy_period = 500;           // G
  /// Consecutive failures at the greedy threshold before the amortization
  /// reset fires; defaults to one greedy period.
  int fail_streak_limit = 0;  // 0 = use greedy_period
};

/// Moving-threshold controller. The threshold chases |mu - xi_2| where
/// xi_2 is the best energy seen and mu the fake minimum: a greedy shift to
/// |mu - xi_2| every G episodes, a decrease of delta/kappa per solved
/// episode (clamped at |mu - xi_2|), delta shrinking after every 50
/// solves, and a reset to |mu - xi_2| + delta after a failure streak at
/// the greedy threshold.
struct CurriculumState {
  CurriculumConfig config;
  double mu = 0.0;             // fake minimum energy
  double best_energy = 0.0;    // xi_2
  double delta = 0.0;
  double current_threshold = 0.0;
  long episode_count = 0;
  long success_count = 0;
  int fail_streak = 0;
  bool at_greedy_threshold = false;

  static CurriculumState init(const CurriculumConfig& config, double fake_min);
};

struct EpisodeOutcome {
  bool solved = false;
  double best_energy = 0.0;
};

CurriculumState curriculum_update(CurriculumState state, const EpisodeOutcome& outcome);

enum class RewardKind { DenseLog, Sparse };

struct RandomHalting {
  double p = 0.5;
  int n_s = 1;
};

struct EnvConfig {
  int max_steps = 20;
  int max_depth = 0;  // T; 0 = max_steps
  RewardKind reward_kind = RewardKind::DenseLog;
  double threshold = 1e-4;  // zeta
  double success_bonus = 500.0;  // R
  bool append_cost_to_observation = false;
  std::optional<RandomHalting> random_halting;
  OptimizeOptions optimizer;
  std::optional<NoiseSpec> noise;
  /// Empty = all-to-all CNOT connectivity; otherwise only the listed
  /// (ctrl, targ) pairs are ever legal.
  std::vector<std::pair<int, int>> allowed_cnot_pairs;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  bool success = false;
  double cost = 0.0;
  int gate_count = 0;
  int depth = 0;
};

/// One episode runner: the agent appends gates; every step re-optimizes
/// all angles globally, computes the reward and the done flag.
class QasEnv {
 public:
  QasEnv(VariationalProblem problem, EnvConfig config);

  int num_qubits() const { return n_; }
  int num_actions() const { return action_count(n_); }
  int observation_size() const;
  int max_depth() const { return max_depth_; }

  /// VQE compares energy - fake_min against the threshold; VQSD compares
  /// the cost directly.
  double threshold_offset() const;

  Observation reset(std::mt19937_64& rng);
  StepResult step(const Action& action, std::mt19937_64& rng);

  std::vector<bool> current_legal_mask() const;
  const Circuit& circuit() const { return circuit_; }
  const std::vector<double>& best_angles() const { return best_angles_; }
  double last_cost() const { return last_cost_; }
  double min_cost() const { return min_cost_; }
  int episode_length_limit() const { return episode_limit_; }
  int steps_taken() const { return steps_; }

  void set_threshold(double zeta) { config_.threshold = zeta; }
  double threshold() const { return config_.threshold; }
  const EnvConfig& config() const { return config_; }
  const VariationalProblem& problem() const { return problem_; }

 private:
  double evaluate_initial_cost(std::mt19937_64& rng);

  VariationalProblem problem_;
  EnvConfig config_;
  int n_ = 0;
  int max_depth_ = 0;
  Circuit circuit_;
  IllegalActionTracker tracker_;
  std::vector<bool> static_cnot_mask_;
  std::vector<double> best_angles_;
  double last_cost_ = 0.0;
  double min_cost_ = 0.0;
  int steps_ = 0;
  int episode_limit_ = 0;
};

}  // namespace qas
