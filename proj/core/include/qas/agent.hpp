#pragma once

#include "qas/mlp.hpp"

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <random>
#include <vector>

namespace qas {

/// Replay entry. Rewards are n-step accumulated before insertion;
/// `n_steps` is the bootstrap discount exponent. The next-state legality
/// mask feeds the masked argmax in the DDQN target.
struct TransitionRecord {
  std::vector<float> obs;
  int action = 0;
  double reward = 0.0;
  std::vector<float> next_obs;
  std::vector<std::uint8_t> next_legal;
  bool done = false;
  int n_steps = 1;
};

/// FIFO ring buffer.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(TransitionRecord record);
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  const TransitionRecord& operator[](std::size_t i) const { return records_[i]; }

  std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64& rng) const;

  void save(std::ostream& out) const;
  static ReplayBuffer load(std::istream& in);

 private:
  std::size_t capacity_;
  std::deque<TransitionRecord> records_;
};

struct AgentConfig {
  double gamma = 0.88;
  double epsilon_decay = 0.99995;  // per training action, from 1.0
  double epsilon_floor = 0.05;
  std::size_t replay_capacity = 20000;
  int batch_size = 32;
  double learning_rate = 1e-3;
  int target_update_period = 500;  // actions between hard copies
  bool soft_target = false;
  double tau = 0.01;  // soft-update mixing weight
  int n_step = 1;
  double dropout = 0.1;
  std::vector<int> hidden_sizes = {128, 128, 128};
  double smooth_l1_beta = 1.0;
};

/// eps-greedy over legal actions: uniform with probability eps, otherwise
/// argmax with illegal entries at -inf. Ties break to the lowest index.
int select_action(const Eigen::VectorXd& q_values, const std::vector<bool>& legal, double epsilon,
                  std::mt19937_64& rng);

/// y = r + gamma^n Q_target(s', argmax_a Q_policy(s', a)) with illegal
/// actions masked inside the argmax; terminal transitions use y = r.
Eigen::VectorXd ddqn_targets(const std::vector<const TransitionRecord*>& batch, const Mlp& policy,
                             const Mlp& target, double gamma);

/// 0.5 x^2 for |x| < beta, |x| - 0.5 beta otherwise.
double smooth_l1(double x, double beta = 1.0);
double smooth_l1_grad(double x, double beta = 1.0);

/// Double-DQN learner: policy and target networks, replay buffer, epsilon
/// schedule driven by the training-action counter.
class DdqnAgent {
 public:
  DdqnAgent(int observation_size, int num_actions, AgentConfig config, std::mt19937_64& init_rng);

  /// Greedy mode uses eps = 0 and disables dropout; training mode follows
  /// the epsilon schedule, counts the action and hard-syncs the target
  /// network every target_update_period actions.
  int act(const std::vector<double>& observation, const std::vector<bool>& legal_mask, bool greedy,
          std::mt19937_64& rng);

  void observe(TransitionRecord record) { buffer_.push(std::move(record)); }

  /// One Adam step of the policy network on a sampled batch; returns the
  /// loss. Throws when the buffer holds fewer records than the batch size.
  double train_step(std::mt19937_64& rng);

  double epsilon() const;
  long actions_taken() const { return actions_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const Mlp& policy() const { return policy_; }
  Mlp& policy() { return policy_; }
  const Mlp& target() const { return target_; }
  const AgentConfig& config() const { return config_; }
  int num_actions() const { return num_actions_; }

  void save(std::ostream& out) const;
  static DdqnAgent load(std::istream& in);

 private:
  DdqnAgent(AgentConfig config, Mlp policy, Mlp target, ReplayBuffer buffer);

  AgentConfig config_;
  int num_actions_ = 0;
  Mlp policy_;
  Mlp target_;
  AdamState adam_;
  ReplayBuffer buffer_;
  long actions_ = 0;
};

}  // namespace qas
