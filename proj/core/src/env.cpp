#include "qas/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qas {

std::uint8_t& Observation::at(int slice, int row, int col) {
  return tensor[static_cast<std::size_t>((slice * (qubits + 3) + row) * qubits + col)];
}

std::uint8_t Observation::at(int slice, int row, int col) const {
  return tensor[static_cast<std::size_t>((slice * (qubits + 3) + row) * qubits + col)];
}

int Observation::nonzero_slices() const {
  int count = 0;
  const int slice_size = (qubits + 3) * qubits;
  for (int s = 0; s < max_depth; ++s) {
    bool any = false;
    for (int i = 0; i < slice_size && !any; ++i) {
      any = tensor[static_cast<std::size_t>(s * slice_size + i)] != 0;
    }
    count += any ? 1 : 0;
  }
  return count;
}

std::vector<double> Observation::flatten() const {
  std::vector<double> out;
  out.reserve(tensor.size() + (appended_cost ? 1 : 0));
  for (std::uint8_t v : tensor) out.push_back(static_cast<double>(v));
  if (appended_cost) out.push_back(*appended_cost);
  return out;
}

int Observation::flat_size() const {
  return static_cast<int>(tensor.size()) + (appended_cost ? 1 : 0);
}

Gate Action::to_gate(int n) const {
  if (is_rotation(n)) {
    const GateKind kind = rot_axis() == 1   ? GateKind::RX
                          : rot_axis() == 2 ? GateKind::RY
                                            : GateKind::RZ;
    return Gate{kind, {rot_qubit()}, 0.0};
  }
  return Gate::cnot(ctrl(), target(n));
}

int action_count(int n) { return 3 * n + n * (n - 1); }

Action decode_action(int index, int n) {
  if (index < 0 || index >= action_count(n)) {
    throw std::out_of_range("action index out of range");
  }
  Action a;
  if (index < 3 * n) {
    const int qubit = index / 3;
    const int axis = index % 3 + 1;
    a.code = {n, n, qubit, axis};
  } else {
    const int rest = index - 3 * n;
    const int ctrl = rest / (n - 1);
    const int offset = rest % (n - 1) + 1;
    a.code = {ctrl, offset, n, n};
  }
  return a;
}

int encode_action(const Action& action, int n) {
  if (action.is_rotation(n)) {
    const int qubit = action.rot_qubit();
    const int axis = action.rot_axis();
    if (qubit < 0 || qubit >= n || axis < 1 || axis > 3) {
      throw std::invalid_argument("malformed rotation action");
    }
    return qubit * 3 + (axis - 1);
  }
  const int ctrl = action.ctrl();
  const int offset = action.offset();
  if (ctrl < 0 || ctrl >= n || offset < 1 || offset >= n || action.code[2] != n ||
      action.code[3] != n) {
    throw std::invalid_argument("malformed CNOT action");
  }
  return 3 * n + ctrl * (n - 1) + (offset - 1);
}

Observation encode(const Circuit& circuit, int max_depth, int n) {
  if (circuit.num_qubits() != n) throw std::invalid_argument("encode: qubit count mismatch");
  if (circuit.depth() > max_depth) throw std::invalid_argument("encode: circuit depth exceeds T");
  Observation obs;
  obs.max_depth = max_depth;
  obs.qubits = n;
  obs.tensor.assign(static_cast<std::size_t>(max_depth * (n + 3) * n), 0);

  std::vector<int> moments(static_cast<std::size_t>(n), 0);
  for (const auto& g : circuit.gates()) {
    if (g.kind == GateKind::CNOT || g.kind == GateKind::CZ) {
      const int c = g.qubits[0];
      const int t = g.qubits[1];
      const int slice = std::max(moments[c], moments[t]);
      obs.at(slice, t, c) = 1;
      moments[c] = slice + 1;
      moments[t] = slice + 1;
    } else {
      const int q = g.qubits[0];
      const int axis = g.kind == GateKind::RX ? 1 : g.kind == GateKind::RY ? 2 : 3;
      if (!is_rotation(g.kind)) {
        throw std::invalid_argument("encode supports rotation and two-qubit gates only");
      }
      obs.at(moments[q], n + axis - 1, q) = 1;
      moments[q] += 1;
    }
  }
  return obs;
}

namespace {

std::pair<int, int> action_qubits(const Action& a, int n) {
  if (a.is_rotation(n)) return {a.rot_qubit(), -1};
  return {a.ctrl(), a.target(n)};
}

bool shares_qubit(const Action& a, const Action& b, int n) {
  const auto [a0, a1] = action_qubits(a, n);
  const auto [b0, b1] = action_qubits(b, n);
  return a0 == b0 || a0 == b1 || (a1 != -1 && (a1 == b0 || a1 == b1));
}

}  // namespace

void IllegalActionTracker::on_action(const Action& action) {
  std::vector<Action> kept;
  kept.reserve(tracked_.size() + 1);
  for (const auto& t : tracked_) {
    if (!shares_qubit(action, t, n_)) kept.push_back(t);
  }
  kept.push_back(action);
  tracked_ = std::move(kept);
}

bool IllegalActionTracker::is_illegal(const Action& action) const {
  return std::find(tracked_.begin(), tracked_.end(), action) != tracked_.end();
}

std::vector<bool> legal_mask(const std::vector<Action>& history, int n) {
  IllegalActionTracker tracker(n);
  for (const auto& a : history) tracker.on_action(a);
  std::vector<bool> mask(static_cast<std::size_t>(action_count(n)));
  for (int i = 0; i < action_count(n); ++i) {
    mask[static_cast<std::size_t>(i)] = !tracker.is_illegal(decode_action(i, n));
  }
  return mask;
}

double reward_dense(double cost, double zeta, double success_bonus) {
  if (!std::isfinite(cost)) throw std::invalid_argument("reward_dense: cost not finite");
  if (cost < zeta + 1e-5) return success_bonus;
  return -std::log(cost - zeta);
}

double reward_sparse(double cost_t, double cost_prev, int t, int max_steps, double zeta,
                     double e_min) {
  if (cost_t < zeta) return 5.0;
  if (t >= max_steps) return -5.0;
  const double denom = cost_prev - e_min;
  if (denom <= 0.0) return -1.0;
  return std::max((cost_prev - cost_t) / denom, -1.0);
}

int sample_episode_length(double p, int n_s, std::mt19937_64& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("halting probability must be in (0, 1]");
  if (n_s < 1) throw std::invalid_argument("halting success count must be >= 1");
  if (p >= 1.0) return n_s;
  std::negative_binomial_distribution<int> failures(n_s, p);
  return n_s + failures(rng);
}

CurriculumState CurriculumState::init(const CurriculumConfig& config, double fake_min) {
  CurriculumState s;
  s.config = config;
  s.mu = fake_min;
  s.best_energy = config.initial_threshold;  // xi_2 starts at xi_1
  s.delta = config.amortization;
  s.current_threshold = config.initial_threshold;
  return s;
}

CurriculumState curriculum_update(CurriculumState state, const EpisodeOutcome& outcome) {
  CurriculumState s = std::move(state);
  const int streak_limit =
      s.config.fail_streak_limit > 0 ? s.config.fail_streak_limit : s.config.greedy_period;
  s.episode_count += 1;
  s.best_energy = std::min(s.best_energy, outcome.best_energy);
  const double gap = std::abs(s.mu - s.best_energy);

  if (outcome.solved) {
    s.success_count += 1;
    s.fail_streak = 0;
    if (s.config.shift_radius > 0.0) {
      s.current_threshold =
          std::max(s.current_threshold - s.delta / s.config.shift_radius, gap);
    }
    if (s.success_count % 50 == 0) {
      s.delta = std::max(s.delta - s.config.amortization_decrement, 0.0);
    }
  } else {
    s.fail_streak += 1;
  }

  if (s.config.greedy_period > 0 && s.episode_count % s.config.greedy_period == 0) {
    s.current_threshold = gap;
    s.at_greedy_threshold = true;
    s.fail_streak = 0;
  } else if (s.episode_count >= s.config.greedy_period) {
    // Between greedy shifts the threshold stays inside [gap, gap + delta];
    // an improving best energy drags it down immediately.
    s.current_threshold = std::clamp(s.current_threshold, gap, gap + s.delta);
  }

  if (s.at_greedy_threshold && s.fail_streak >= streak_limit) {
    s.current_threshold = gap + s.delta;
    s.at_greedy_threshold = false;
    s.fail_streak = 0;
  }
  return s;
}

QasEnv::QasEnv(VariationalProblem problem, EnvConfig config)
    : problem_(std::move(problem)),
      config_(std::move(config)),
      n_(std::holds_alternative<VqsdProblem>(problem_)
             ? std::get<VqsdProblem>(problem_).target.num_qubits()
             : std::get<VqeProblem>(problem_).hamiltonian->num_qubits()),
      max_depth_(config_.max_depth > 0 ? config_.max_depth : config_.max_steps),
      circuit_(n_),
      tracker_(n_) {
  if (config_.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (max_depth_ < config_.max_steps) {
    throw std::invalid_argument("observation depth T must cover max_steps");
  }
  if (config_.random_halting) {
    const auto& h = *config_.random_halting;
    if (!(h.p > 0.0 && h.p <= 1.0) || h.n_s < 1) {
      throw std::invalid_argument("invalid random-halting parameters");
    }
  }
  static_cnot_mask_.assign(static_cast<std::size_t>(action_count(n_)), true);
  if (!config_.allowed_cnot_pairs.empty()) {
    for (int i = 3 * n_; i < action_count(n_); ++i) {
      const Action a = decode_action(i, n_);
      const std::pair<int, int> pair{a.ctrl(), a.target(n_)};
      const bool allowed =
          std::find(config_.allowed_cnot_pairs.begin(), config_.allowed_cnot_pairs.end(), pair) !=
          config_.allowed_cnot_pairs.end();
      static_cnot_mask_[static_cast<std::size_t>(i)] = allowed;
    }
  }
  episode_limit_ = config_.max_steps;
}

int QasEnv::observation_size() const {
  return max_depth_ * (n_ + 3) * n_ + (config_.append_cost_to_observation ? 1 : 0);
}

double QasEnv::threshold_offset() const {
  if (std::holds_alternative<VqeProblem>(problem_)) {
    return std::get<VqeProblem>(problem_).fake_min;
  }
  return 0.0;
}

double QasEnv::evaluate_initial_cost(std::mt19937_64& rng) {
  const NoiseSpec* noise = config_.noise ? &*config_.noise : nullptr;
  if (std::holds_alternative<VqsdProblem>(problem_)) {
    return vqsd_cost(std::get<VqsdProblem>(problem_), circuit_, {}, noise, &rng);
  }
  return vqe_energy(std::get<VqeProblem>(problem_), circuit_, {}, noise, &rng);
}

Observation QasEnv::reset(std::mt19937_64& rng) {
  circuit_ = Circuit(n_);
  tracker_.reset();
  best_angles_.clear();
  steps_ = 0;
  episode_limit_ = config_.max_steps;
  if (config_.random_halting) {
    const int drawn = sample_episode_length(config_.random_halting->p,
                                            config_.random_halting->n_s, rng);
    // The observation tensor caps the usable step count.
    episode_limit_ = std::min(drawn, config_.max_steps);
  }
  last_cost_ = evaluate_initial_cost(rng);
  min_cost_ = last_cost_;
  Observation obs = encode(circuit_, max_depth_, n_);
  if (config_.append_cost_to_observation) obs.appended_cost = last_cost_;
  return obs;
}

std::vector<bool> QasEnv::current_legal_mask() const {
  std::vector<bool> mask(static_cast<std::size_t>(action_count(n_)));
  for (int i = 0; i < action_count(n_); ++i) {
    mask[static_cast<std::size_t>(i)] =
        static_cnot_mask_[static_cast<std::size_t>(i)] && !tracker_.is_illegal(decode_action(i, n_));
  }
  return mask;
}

StepResult QasEnv::step(const Action& action, std::mt19937_64& rng) {
  const int index = encode_action(action, n_);
  if (!current_legal_mask()[static_cast<std::size_t>(index)]) {
    throw std::logic_error("illegal action applied to environment");
  }
  const double prev_cost = last_cost_;
  circuit_.append(action.to_gate(n_));
  tracker_.on_action(action);
  steps_ += 1;

  OptimizeOptions opts = config_.optimizer;
  if (circuit_.parameter_count() > 0) {
    // Warm start: previous angles extended with zeros for new rotations.
    Eigen::VectorXd hint = Eigen::VectorXd::Zero(circuit_.parameter_count());
    for (std::size_t i = 0; i < best_angles_.size() && i < static_cast<std::size_t>(hint.size());
         ++i) {
      hint(static_cast<Eigen::Index>(i)) = best_angles_[i];
    }
    opts.init_hints.push_back(std::move(hint));
  }
  const NoiseSpec* noise = config_.noise ? &*config_.noise : nullptr;
  const OptimResult opt = optimize_angles(problem_, circuit_, opts, rng, noise);
  best_angles_.assign(opt.best_point.data(), opt.best_point.data() + opt.best_point.size());
  last_cost_ = opt.best_value;
  min_cost_ = std::min(min_cost_, last_cost_);

  const double offset = threshold_offset();
  const double gauge = last_cost_ - offset;
  const double prev_gauge = prev_cost - offset;

  StepResult result;
  if (config_.reward_kind == RewardKind::DenseLog) {
    result.success = gauge < config_.threshold + 1e-5;
    result.reward = reward_dense(gauge, config_.threshold, config_.success_bonus);
  } else {
    result.success = gauge < config_.threshold;
    result.reward =
        reward_sparse(gauge, prev_gauge, steps_, episode_limit_, config_.threshold, 0.0);
  }
  result.done = result.success || steps_ >= episode_limit_;
  result.cost = last_cost_;
  result.gate_count = circuit_.gate_count();
  result.depth = circuit_.depth();
  result.observation = encode(circuit_, max_depth_, n_);
  if (config_.append_cost_to_observation) result.observation.appended_cost = last_cost_;
  return result;
}

}  // namespace qas
