#include "qas/agent.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace qas {

namespace {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated agent payload");
  return v;
}

template <typename T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
  write_pod<std::uint64_t>(out, v.size());
  if (!v.empty()) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(sizeof(T) * v.size()));
  }
}

template <typename T>
std::vector<T> read_vec(std::istream& in) {
  const auto n = read_pod<std::uint64_t>(in);
  std::vector<T> v(static_cast<std::size_t>(n));
  if (n) {
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(T) * n));
    if (!in) throw std::runtime_error("truncated agent payload");
  }
  return v;
}

Eigen::MatrixXd batch_matrix(const std::vector<const TransitionRecord*>& batch, bool next) {
  const std::size_t dim = next ? batch.front()->next_obs.size() : batch.front()->obs.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t c = 0; c < batch.size(); ++c) {
    const auto& src = next ? batch[c]->next_obs : batch[c]->obs;
    if (src.size() != dim) throw std::invalid_argument("ragged batch observation sizes");
    for (std::size_t r = 0; r < dim; ++r) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = src[r];
    }
  }
  return m;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(TransitionRecord record) {
  if (records_.size() == capacity_) records_.pop_front();
  records_.push_back(std::move(record));
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch,
                                                      std::mt19937_64& rng) const {
  if (batch > records_.size()) throw std::invalid_argument("batch exceeds buffer size");
  std::uniform_int_distribution<std::size_t> dist(0, records_.size() - 1);
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = dist(rng);
  return idx;
}

void ReplayBuffer::save(std::ostream& out) const {
  write_pod<std::uint64_t>(out, capacity_);
  write_pod<std::uint64_t>(out, records_.size());
  for (const auto& r : records_) {
    write_vec(out, r.obs);
    write_pod<std::int32_t>(out, r.action);
    write_pod<double>(out, r.reward);
    write_vec(out, r.next_obs);
    write_vec(out, r.next_legal);
    write_pod<std::uint8_t>(out, r.done ? 1 : 0);
    write_pod<std::int32_t>(out, r.n_steps);
  }
}

ReplayBuffer ReplayBuffer::load(std::istream& in) {
  const auto capacity = read_pod<std::uint64_t>(in);
  ReplayBuffer buf(static_cast<std::size_t>(capacity));
  const auto count = read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    TransitionRecord r;
    r.obs = read_vec<float>(in);
    r.action = read_pod<std::int32_t>(in);
    r.reward = read_pod<double>(in);
    r.next_obs = read_vec<float>(in);
    r.next_legal = read_vec<std::uint8_t>(in);
    r.done = read_pod<std::uint8_t>(in) != 0;
    r.n_steps = read_pod<std::int32_t>(in);
    buf.push(std::move(r));
  }
  return buf;
}

int select_action(const Eigen::VectorXd& q_values, const std::vector<bool>& legal, double epsilon,
                  std::mt19937_64& rng) {
  if (static_cast<std::size_t>(q_values.size()) != legal.size()) {
    throw std::invalid_argument("legality mask size differs from Q-vector");
  }
  std::vector<int> legal_indices;
  for (std::size_t i = 0; i < legal.size(); ++i) {
    if (legal[i]) legal_indices.push_back(static_cast<int>(i));
  }
  if (legal_indices.empty()) throw std::invalid_argument("no legal action available");

  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < epsilon) {
      std::uniform_int_distribution<std::size_t> pick(0, legal_indices.size() - 1);
      return legal_indices[pick(rng)];
    }
  }
  int best = legal_indices.front();
  double best_q = -std::numeric_limits<double>::infinity();
  for (int i : legal_indices) {
    if (q_values(i) > best_q) {
      best_q = q_values(i);
      best = i;
    }
  }
  return best;
}

Eigen::VectorXd ddqn_targets(const std::vector<const TransitionRecord*>& batch, const Mlp& policy,
                             const Mlp& target, double gamma) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));

  std::vector<std::size_t> boot;  // records that bootstrap
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch[i]->done) boot.push_back(i);
  }
  Eigen::MatrixXd q_policy_next, q_target_next;
  if (!boot.empty()) {
    std::vector<const TransitionRecord*> sub;
    sub.reserve(boot.size());
    for (auto i : boot) sub.push_back(batch[i]);
    const Eigen::MatrixXd next = batch_matrix(sub, /*next=*/true);
    q_policy_next = policy.forward(next, /*train_mode=*/false);
    q_target_next = target.forward(next, /*train_mode=*/false);
  }

  std::size_t cursor = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TransitionRecord& r = *batch[i];
    if (r.done) {
      y(static_cast<Eigen::Index>(i)) = r.reward;
      continue;
    }
    const Eigen::Index col = static_cast<Eigen::Index>(cursor++);
    if (r.next_legal.size() != static_cast<std::size_t>(q_policy_next.rows())) {
      throw std::invalid_argument("next-state legality mask size mismatch");
    }
    int best = -1;
    double best_q = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < q_policy_next.rows(); ++a) {
      if (!r.next_legal[static_cast<std::size_t>(a)]) continue;
      if (q_policy_next(a, col) > best_q) {
        best_q = q_policy_next(a, col);
        best = static_cast<int>(a);
      }
    }
    if (best < 0) throw std::invalid_argument("transition with no legal next action");
    y(static_cast<Eigen::Index>(i)) =
        r.reward + std::pow(gamma, r.n_steps) * q_target_next(best, col);
  }
  return y;
}

double smooth_l1(double x, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("smooth_l1 beta must be positive");
  const double ax = std::abs(x);
  return ax < beta ? 0.5 * x * x : ax - 0.5 * beta;
}

double smooth_l1_grad(double x, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("smooth_l1 beta must be positive");
  if (std::abs(x) < beta) return x;
  return x > 0.0 ? 1.0 : -1.0;
}

DdqnAgent::DdqnAgent(int observation_size, int num_actions, AgentConfig config,
                     std::mt19937_64& init_rng)
    : config_(std::move(config)),
      num_actions_(num_actions),
      policy_([&] {
        std::vector<int> sizes;
        sizes.push_back(observation_size);
        for (int h : config_.hidden_sizes) sizes.push_back(h);
        sizes.push_back(num_actions);
        return Mlp::random_init(sizes, config_.dropout, init_rng);
      }()),
      target_(policy_),
      adam_(AdamState::like(policy_)),
      buffer_(config_.replay_capacity) {
  if (num_actions_ < 1) throw std::invalid_argument("agent needs at least one action");
}

DdqnAgent::DdqnAgent(AgentConfig config, Mlp policy, Mlp target, ReplayBuffer buffer)
    : config_(std::move(config)),
      num_actions_(policy.output_size()),
      policy_(std::move(policy)),
      target_(std::move(target)),
      adam_(AdamState::like(policy_)),
      buffer_(std::move(buffer)) {}

double DdqnAgent::epsilon() const {
  return std::max(config_.epsilon_floor,
                  std::pow(config_.epsilon_decay, static_cast<double>(actions_)));
}

int DdqnAgent::act(const std::vector<double>& observation, const std::vector<bool>& legal_mask,
                   bool greedy, std::mt19937_64& rng) {
  const Eigen::Map<const Eigen::VectorXd> obs(observation.data(),
                                              static_cast<Eigen::Index>(observation.size()));
  const double eps = greedy ? 0.0 : epsilon();
  // Training-phase selection runs the net in train mode (dropout on);
  // greedy test selection is deterministic.
  const Eigen::VectorXd q = policy_.forward_one(obs, /*train_mode=*/!greedy, &rng);
  const int action = select_action(q, legal_mask, eps, rng);
  if (!greedy) {
    actions_ += 1;
    if (!config_.soft_target && config_.target_update_period > 0 &&
        actions_ % config_.target_update_period == 0) {
      target_ = policy_;
    }
  }
  return action;
}

double DdqnAgent::train_step(std::mt19937_64& rng) {
  const std::size_t batch_size = static_cast<std::size_t>(config_.batch_size);
  if (buffer_.size() < batch_size) {
    throw std::runtime_error("replay buffer smaller than batch size");
  }
  const std::vector<std::size_t> idx = buffer_.sample_indices(batch_size, rng);
  std::vector<const TransitionRecord*> batch;
  batch.reserve(idx.size());
  for (auto i : idx) batch.push_back(&buffer_[i]);

  const Eigen::VectorXd y = ddqn_targets(batch, policy_, target_, config_.gamma);

  const Eigen::MatrixXd obs = batch_matrix(batch, /*next=*/false);
  Mlp::Cache cache;
  const Eigen::MatrixXd q = policy_.forward(obs, /*train_mode=*/true, &rng, &cache);

  Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Eigen::Index col = static_cast<Eigen::Index>(i);
    const Eigen::Index row = batch[i]->action;
    const double diff = q(row, col) - y(col);
    loss += smooth_l1(diff, config_.smooth_l1_beta) * inv_b;
    dq(row, col) = smooth_l1_grad(diff, config_.smooth_l1_beta) * inv_b;
  }

  const Mlp::Gradients grads = policy_.backward(cache, dq);
  adam_update(policy_, grads, adam_, config_.learning_rate);

  if (config_.soft_target) {
    for (std::size_t l = 0; l < policy_.weights().size(); ++l) {
      target_.weights()[l] =
          config_.tau * policy_.weights()[l] + (1.0 - config_.tau) * target_.weights()[l];
      target_.biases()[l] =
          config_.tau * policy_.biases()[l] + (1.0 - config_.tau) * target_.biases()[l];
    }
  }
  return loss;
}

void DdqnAgent::save(std::ostream& out) const {
  write_pod<double>(out, config_.gamma);
  write_pod<double>(out, config_.epsilon_decay);
  write_pod<double>(out, config_.epsilon_floor);
  write_pod<std::uint64_t>(out, config_.replay_capacity);
  write_pod<std::int32_t>(out, config_.batch_size);
  write_pod<double>(out, config_.learning_rate);
  write_pod<std::int32_t>(out, config_.target_update_period);
  write_pod<std::uint8_t>(out, config_.soft_target ? 1 : 0);
  write_pod<double>(out, config_.tau);
  write_pod<std::int32_t>(out, config_.n_step);
  write_pod<double>(out, config_.dropout);
  write_pod<double>(out, config_.smooth_l1_beta);
  write_pod<std::uint64_t>(out, config_.hidden_sizes.size());
  for (int h : config_.hidden_sizes) write_pod<std::int32_t>(out, h);
  write_pod<std::int64_t>(out, actions_);
  policy_.save(out);
  target_.save(out);
  adam_.save(out);
  buffer_.save(out);
}

DdqnAgent DdqnAgent::load(std::istream& in) {
  AgentConfig cfg;
  cfg.gamma = read_pod<double>(in);
  cfg.epsilon_decay = read_pod<double>(in);
  cfg.epsilon_floor = read_pod<double>(in);
  cfg.replay_capacity = static_cast<std::size_t>(read_pod<std::uint64_t>(in));
  cfg.batch_size = read_pod<std::int32_t>(in);
  cfg.learning_rate = read_pod<double>(in);
  cfg.target_update_period = read_pod<std::int32_t>(in);
  cfg.soft_target = read_pod<std::uint8_t>(in) != 0;
  cfg.tau = read_pod<double>(in);
  cfg.n_step = read_pod<std::int32_t>(in);
  cfg.dropout = read_pod<double>(in);
  cfg.smooth_l1_beta = read_pod<double>(in);
  const auto hidden = read_pod<std::uint64_t>(in);
  cfg.hidden_sizes.clear();
  for (std::uint64_t i = 0; i < hidden; ++i) {
    cfg.hidden_sizes.push_back(read_pod<std::int32_t>(in));
  }
  const auto actions = read_pod<std::int64_t>(in);
  Mlp policy = Mlp::load(in);
  Mlp target = Mlp::load(in);
  AdamState adam = AdamState::load(in);
  ReplayBuffer buffer = ReplayBuffer::load(in);
  DdqnAgent agent(std::move(cfg), std::move(policy), std::move(target), std::move(buffer));
  agent.adam_ = std::move(adam);
  agent.actions_ = actions;
  return agent;
}

}  // namespace qas
