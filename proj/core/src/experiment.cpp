#include "qas/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qas {

namespace {

constexpr char kCheckpointMagic[8] = {'Q', 'A', 'S', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated checkpoint");
  return v;
}

void write_rng(std::ostream& out, const std::mt19937_64& rng) {
  std::ostringstream ss;
  ss << rng;
  const std::string s = ss.str();
  write_pod<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::mt19937_64 read_rng(std::istream& in) {
  const auto len = read_pod<std::uint64_t>(in);
  std::string s(static_cast<std::size_t>(len), '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("truncated checkpoint rng state");
  std::istringstream ss(s);
  std::mt19937_64 rng;
  ss >> rng;
  return rng;
}

struct ExperimentState {
  long next_episode = 0;
  std::mt19937_64 env_rng;
  std::mt19937_64 agent_rng;
  std::optional<CurriculumState> curriculum;
  BestSolution best;
  long first_train_success = -1;
  long first_test_success = -1;
  long train_successes = 0;
  long test_successes = 0;
};

void write_best(std::ostream& out, const BestSolution& best) {
  write_pod<std::uint8_t>(out, best.found ? 1 : 0);
  write_pod<double>(out, best.cost);
  write_pod<double>(out, best.exact_cost);
  write_pod<std::int64_t>(out, best.episode);
  write_pod<std::uint8_t>(out, best.from_test_phase ? 1 : 0);
  write_pod<std::uint64_t>(out, best.gates.size());
  for (const auto& g : best.gates) {
    write_pod<std::int32_t>(out, static_cast<std::int32_t>(g.kind));
    write_pod<std::int32_t>(out, static_cast<std::int32_t>(g.qubits.size()));
    for (int q : g.qubits) write_pod<std::int32_t>(out, q);
    write_pod<std::uint8_t>(out, g.angle ? 1 : 0);
    write_pod<double>(out, g.angle.value_or(0.0));
  }
  write_pod<std::uint64_t>(out, best.angles.size());
  for (double a : best.angles) write_pod<double>(out, a);
}

BestSolution read_best(std::istream& in) {
  BestSolution best;
  best.found = read_pod<std::uint8_t>(in) != 0;
  best.cost = read_pod<double>(in);
  best.exact_cost = read_pod<double>(in);
  best.episode = read_pod<std::int64_t>(in);
  best.from_test_phase = read_pod<std::uint8_t>(in) != 0;
  const auto gates = read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < gates; ++i) {
    Gate g;
    g.kind = static_cast<GateKind>(read_pod<std::int32_t>(in));
    const auto nq = read_pod<std::int32_t>(in);
    for (std::int32_t j = 0; j < nq; ++j) g.qubits.push_back(read_pod<std::int32_t>(in));
    const bool has_angle = read_pod<std::uint8_t>(in) != 0;
    const double angle = read_pod<double>(in);
    if (has_angle) g.angle = angle;
    best.gates.push_back(std::move(g));
  }
  const auto angles = read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < angles; ++i) best.angles.push_back(read_pod<double>(in));
  return best;
}

void save_checkpoint(const std::string& path, const DdqnAgent& agent,
                     const ExperimentState& state) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  write_pod<std::uint32_t>(out, kCheckpointVersion);
  write_pod<std::int64_t>(out, state.next_episode);
  write_pod<std::int64_t>(out, state.first_train_success);
  write_pod<std::int64_t>(out, state.first_test_success);
  write_pod<std::int64_t>(out, state.train_successes);
  write_pod<std::int64_t>(out, state.test_successes);
  write_rng(out, state.env_rng);
  write_rng(out, state.agent_rng);
  write_pod<std::uint8_t>(out, state.curriculum ? 1 : 0);
  if (state.curriculum) {
    const CurriculumState& c = *state.curriculum;
    write_pod<double>(out, c.config.initial_threshold);
    write_pod<double>(out, c.config.amortization);
    write_pod<double>(out, c.config.amortization_decrement);
    write_pod<double>(out, c.config.shift_radius);
    write_pod<std::int32_t>(out, c.config.greedy_period);
    write_pod<std::int32_t>(out, c.config.fail_streak_limit);
    write_pod<double>(out, c.mu);
    write_pod<double>(out, c.best_energy);
    write_pod<double>(out, c.delta);
    write_pod<double>(out, c.current_threshold);
    write_pod<std::int64_t>(out, c.episode_count);
    write_pod<std::int64_t>(out, c.success_count);
    write_pod<std::int32_t>(out, c.fail_streak);
    write_pod<std::uint8_t>(out, c.at_greedy_threshold ? 1 : 0);
  }
  write_best(out, state.best);
  agent.save(out);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

std::pair<DdqnAgent, ExperimentState> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  ExperimentState state;
  state.next_episode = read_pod<std::int64_t>(in);
  state.first_train_success = read_pod<std::int64_t>(in);
  state.first_test_success = read_pod<std::int64_t>(in);
  state.train_successes = read_pod<std::int64_t>(in);
  state.test_successes = read_pod<std::int64_t>(in);
  state.env_rng = read_rng(in);
  state.agent_rng = read_rng(in);
  if (read_pod<std::uint8_t>(in) != 0) {
    CurriculumState c;
    c.config.initial_threshold = read_pod<double>(in);
    c.config.amortization = read_pod<double>(in);
    c.config.amortization_decrement = read_pod<double>(in);
    c.config.shift_radius = read_pod<double>(in);
    c.config.greedy_period = read_pod<std::int32_t>(in);
    c.config.fail_streak_limit = read_pod<std::int32_t>(in);
    c.mu = read_pod<double>(in);
    c.best_energy = read_pod<double>(in);
    c.delta = read_pod<double>(in);
    c.current_threshold = read_pod<double>(in);
    c.episode_count = read_pod<std::int64_t>(in);
    c.success_count = read_pod<std::int64_t>(in);
    c.fail_streak = read_pod<std::int32_t>(in);
    c.at_greedy_threshold = read_pod<std::uint8_t>(in) != 0;
    state.curriculum = c;
  }
  state.best = read_best(in);
  DdqnAgent agent = DdqnAgent::load(in);
  return {std::move(agent), std::move(state)};
}

class LogWriter {
 public:
  LogWriter(const std::string& out_dir, const std::string& name, bool append) {
    if (out_dir.empty() || name.empty()) return;
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/" + name;
    const bool exists = std::filesystem::exists(path);
    file_.open(path, append ? std::ios::app : std::ios::trunc);
    if (!file_) throw std::runtime_error("cannot open log file: " + path);
    if (!append || !exists) file_ << episode_log_header() << "\n";
  }

  void write(const EpisodeLogRow& row) {
    if (file_.is_open()) {
      file_ << episode_log_row(row) << "\n";
      file_.flush();
    }
  }

 private:
  std::ofstream file_;
};

struct EpisodePhaseResult {
  EpisodeLogRow row;
  double min_gauge_cost = 0.0;  // threshold-gauge minimum over the episode
};

// Runs one episode. agent == nullptr selects uniformly random legal
// actions (the random-search baseline).
EpisodePhaseResult play_episode(QasEnv& env, DdqnAgent* agent, bool greedy, bool learn,
                                std::mt19937_64& env_rng, std::mt19937_64& agent_rng,
                                long episode_index, BestSolution* best, bool from_test_phase) {
  const double t0 = now_seconds();
  Observation obs = env.reset(env_rng);
  std::vector<double> flat = obs.flatten();

  // Forward-view n-step accumulation before buffer insertion.
  const int n_step = agent != nullptr ? std::max(1, agent->config().n_step) : 1;
  const double gamma = agent != nullptr ? agent->config().gamma : 0.0;
  struct Pending {
    std::vector<float> obs;
    int action = 0;
    std::vector<double> rewards;
  };
  std::deque<Pending> pending;

  auto to_float = [](const std::vector<double>& v) {
    std::vector<float> f(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) f[i] = static_cast<float>(v[i]);
    return f;
  };
  auto mask_bytes = [](const std::vector<bool>& m) {
    std::vector<std::uint8_t> b(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) b[i] = m[i] ? 1 : 0;
    return b;
  };

  EpisodeLogRow row;
  row.episode = episode_index;
  double min_gauge = env.last_cost() - env.threshold_offset();
  bool success = false;

  while (true) {
    const std::vector<bool> mask = env.current_legal_mask();
    int action_index;
    if (agent != nullptr) {
      action_index = agent->act(flat, mask, greedy, agent_rng);
    } else {
      std::vector<int> legal;
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) legal.push_back(static_cast<int>(i));
      }
      std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
      action_index = legal[pick(agent_rng)];
    }

    const StepResult step = env.step(decode_action(action_index, env.num_qubits()), env_rng);
    const std::vector<double> next_flat = step.observation.flatten();
    min_gauge = std::min(min_gauge, step.cost - env.threshold_offset());

    if (learn && agent != nullptr) {
      pending.push_back({to_float(flat), action_index, {}});
      for (auto& p : pending) p.rewards.push_back(step.reward);
      const auto next_mask = mask_bytes(env.current_legal_mask());
      auto flush_front = [&](bool terminal) {
        Pending& p = pending.front();
        TransitionRecord rec;
        rec.obs = std::move(p.obs);
        rec.action = p.action;
        double acc = 0.0;
        for (std::size_t i = p.rewards.size(); i-- > 0;) {
          acc = p.rewards[i] + gamma * acc;
        }
        rec.reward = acc;
        rec.n_steps = static_cast<int>(p.rewards.size());
        rec.next_obs = to_float(next_flat);
        rec.next_legal = next_mask;
        rec.done = terminal;
        agent->observe(std::move(rec));
        pending.pop_front();
      };
      if (step.done) {
        while (!pending.empty()) flush_front(true);
      } else if (static_cast<int>(pending.size()) == n_step) {
        flush_front(false);
      }
      if (agent->buffer().size() >= static_cast<std::size_t>(agent->config().batch_size)) {
        agent->train_step(agent_rng);
      }
    }

    flat = next_flat;
    if (step.done || step.success) {
      success = step.success;
      row.steps = env.steps_taken();
      row.final_cost = step.cost;
      row.gate_count = step.gate_count;
      row.depth = step.depth;
      break;
    }
  }

  row.success = success;
  row.min_cost = env.min_cost();
  row.rotation_count = env.circuit().rotation_count();
  row.cnot_count = env.circuit().cnot_count();
  row.epsilon = agent != nullptr ? agent->epsilon() : 1.0;
  row.threshold = env.threshold();
  row.wall_time_s = now_seconds() - t0;

  if (best != nullptr) {
    // Under a NoiseSpec the optimizer-facing cost is a noisy estimate;
    // candidate selection goes by the exact re-evaluation.
    const bool noisy = env.config().noise.has_value() &&
                       (env.config().noise->has_channels() || env.config().noise->shots);
    const double exact =
        noisy ? exact_solution_cost(env.problem(), env.circuit().gates(), env.best_angles())
              : env.last_cost();
    if (!best->found || exact < best->exact_cost) {
      best->found = true;
      best->cost = env.last_cost();
      best->exact_cost = exact;
      best->gates = env.circuit().gates();
      best->angles = env.best_angles();
      best->episode = episode_index;
      best->from_test_phase = from_test_phase;
    }
  }
  return {row, min_gauge};
}

RunResult run_loop(const VariationalProblem& problem, const RunConfig& config,
                   std::optional<DdqnAgent> agent, ExperimentState state, bool append_logs) {
  QasEnv env(problem, config.env);
  LogWriter train_writer(config.out_dir, "train_log.csv", append_logs);
  LogWriter test_writer(config.out_dir, agent ? "test_log.csv" : "", append_logs);

  RunResult result;
  result.first_train_success = state.first_train_success;
  result.first_test_success = state.first_test_success;
  result.train_successes = state.train_successes;
  result.test_successes = state.test_successes;
  result.best = state.best;

  for (long ep = state.next_episode; ep < config.episodes; ++ep) {
    if (state.curriculum) env.set_threshold(state.curriculum->current_threshold);

    EpisodePhaseResult train = play_episode(env, agent ? &*agent : nullptr,
                                            /*greedy=*/false, /*learn=*/agent.has_value(),
                                            state.env_rng, state.agent_rng, ep, &result.best,
                                            /*from_test_phase=*/false);
    train_writer.write(train.row);
    result.train_log.push_back(train.row);
    if (train.row.success) {
      result.train_successes += 1;
      if (result.first_train_success < 0) result.first_train_success = ep;
    }

    EpisodeOutcome outcome{train.row.success, train.min_gauge_cost + env.threshold_offset()};
    if (agent) {
      EpisodePhaseResult test = play_episode(env, &*agent, /*greedy=*/true, /*learn=*/false,
                                             state.env_rng, state.agent_rng, ep, &result.best,
                                             /*from_test_phase=*/true);
      test_writer.write(test.row);
      result.test_log.push_back(test.row);
      if (test.row.success) {
        result.test_successes += 1;
        if (result.first_test_success < 0) result.first_test_success = ep;
      }
      // Curriculum feedback comes from the greedy test episode.
      outcome = EpisodeOutcome{test.row.success, test.min_gauge_cost + env.threshold_offset()};
    }
    if (state.curriculum) {
      *state.curriculum = curriculum_update(*state.curriculum, outcome);
    }

    state.next_episode = ep + 1;
    state.first_train_success = result.first_train_success;
    state.first_test_success = result.first_test_success;
    state.train_successes = result.train_successes;
    state.test_successes = result.test_successes;
    state.best = result.best;

    if (config.stop_after_successes > 0 &&
        result.train_successes + result.test_successes >= config.stop_after_successes) {
      break;
    }
    if (config.stop_when_cost_below && result.best.found &&
        result.best.exact_cost < *config.stop_when_cost_below) {
      break;
    }
  }

  result.final_threshold =
      state.curriculum ? state.curriculum->current_threshold : config.env.threshold;
  if (!config.out_dir.empty() && agent) {
    save_checkpoint(checkpoint_path(config.out_dir), *agent, state);
  }
  return result;
}

ExperimentState fresh_state(const VariationalProblem& problem, const RunConfig& config) {
  ExperimentState state;
  std::mt19937_64 master(config.seed);
  state.env_rng.seed(master());
  state.agent_rng.seed(master());
  if (config.curriculum) {
    double mu = 0.0;
    if (std::holds_alternative<VqeProblem>(problem)) {
      mu = std::get<VqeProblem>(problem).fake_min;
    }
    state.curriculum = CurriculumState::init(*config.curriculum, mu);
  }
  return state;
}

}  // namespace

std::string episode_log_header() {
  return "episode,steps,success,final_cost,min_cost,gate_count,rotation_count,cnot_count,depth,"
         "epsilon,threshold,wall_time_s";
}

std::string episode_log_row(const EpisodeLogRow& r) {
  std::ostringstream ss;
  ss << r.episode << ',' << r.steps << ',' << (r.success ? 1 : 0) << ','
     << format_double(r.final_cost) << ',' << format_double(r.min_cost) << ',' << r.gate_count
     << ',' << r.rotation_count << ',' << r.cnot_count << ',' << r.depth << ','
     << format_double(r.epsilon) << ',' << format_double(r.threshold) << ','
     << format_double(r.wall_time_s);
  return ss.str();
}

std::string checkpoint_path(const std::string& out_dir) { return out_dir + "/checkpoint.bin"; }

double exact_solution_cost(const VariationalProblem& problem, const std::vector<Gate>& gates,
                           const std::vector<double>& angles) {
  const int n = std::holds_alternative<VqsdProblem>(problem)
                    ? std::get<VqsdProblem>(problem).target.num_qubits()
                    : std::get<VqeProblem>(problem).hamiltonian->num_qubits();
  Circuit c(n);
  for (const auto& g : gates) c.append(g);
  if (std::holds_alternative<VqsdProblem>(problem)) {
    return vqsd_cost(std::get<VqsdProblem>(problem), c, angles);
  }
  return vqe_energy(std::get<VqeProblem>(problem), c, angles);
}

RunResult run_experiment(const VariationalProblem& problem, const RunConfig& config) {
  ExperimentState state = fresh_state(problem, config);
  QasEnv env(problem, config.env);
  std::mt19937_64 init_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  DdqnAgent agent(env.observation_size(), env.num_actions(), config.agent, init_rng);
  return run_loop(problem, config, std::move(agent), std::move(state), /*append_logs=*/false);
}

RunResult resume_experiment(const VariationalProblem& problem, const RunConfig& config,
                            const std::string& path) {
  auto [agent, state] = load_checkpoint(path);
  return run_loop(problem, config, std::move(agent), std::move(state), /*append_logs=*/true);
}

RunResult random_search_baseline(const VariationalProblem& problem, const RunConfig& config) {
  ExperimentState state = fresh_state(problem, config);
  return run_loop(problem, config, std::nullopt, std::move(state), /*append_logs=*/false);
}

}  // namespace qas
