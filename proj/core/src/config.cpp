#include "qas/config.hpp"

#include "qas/random.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qas {

using nlohmann::json;

TaskKind task_from_name(const std::string& name) {
  if (name == "vqsd") return TaskKind::Vqsd;
  if (name == "vqe") return TaskKind::Vqe;
  if (name == "certify") return TaskKind::Certify;
  if (name == "bench-lhea") return TaskKind::BenchLhea;
  if (name == "random-search") return TaskKind::RandomSearch;
  throw std::invalid_argument("unknown task: " + name);
}

const char* task_name(TaskKind task) {
  switch (task) {
    case TaskKind::Vqsd: return "vqsd";
    case TaskKind::Vqe: return "vqe";
    case TaskKind::Certify: return "certify";
    case TaskKind::BenchLhea: return "bench-lhea";
    case TaskKind::RandomSearch: return "random-search";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

Gate parse_gate(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_string()) {
    fail("gate entries look like [\"RY\", qubit, angle] or [\"CNOT\", ctrl, targ]");
  }
  const GateKind kind = gate_kind_from_name(j[0].get<std::string>());
  Gate g;
  g.kind = kind;
  if (is_two_qubit(kind)) {
    if (j.size() != 3) fail("two-qubit gate needs [name, ctrl, targ]");
    g.qubits = {j[1].get<int>(), j[2].get<int>()};
  } else if (is_rotation(kind)) {
    if (j.size() != 3) fail("rotation gate needs [name, qubit, angle]");
    g.qubits = {j[1].get<int>()};
    g.angle = j[2].get<double>();
  } else {
    if (j.size() != 2) fail("single-qubit gate needs [name, qubit]");
    g.qubits = {j[1].get<int>()};
  }
  return g;
}

ChannelSpec parse_channel(const json& j) {
  ChannelSpec spec;
  if (!j.contains("kind")) fail("channel spec needs a kind");
  spec.kind = j.at("kind").get<std::string>();
  spec.qubits = get_or(j, "qubits", 1);
  spec.gamma = get_or(j, "gamma", 0.0);
  spec.seed = get_or<std::uint64_t>(j, "seed", 0);
  spec.rank = get_or(j, "rank", 0);
  if (j.contains("gates")) {
    for (const auto& g : j.at("gates")) spec.gates.push_back(parse_gate(g));
  }
  if (j.contains("steps")) {
    for (const auto& s : j.at("steps")) spec.steps.push_back(parse_channel(s));
  }
  const std::set<std::string> kinds{"identity",        "depolarizing", "amplitude_damping",
                                    "unitary_circuit", "random",       "composition"};
  if (!kinds.count(spec.kind)) fail("unknown channel kind: " + spec.kind);
  return spec;
}

OptimizeOptions parse_optimizer(const json& j) {
  OptimizeOptions o;
  if (j.contains("preset")) {
    const SpsaPreset preset = spsa_preset(j.at("preset").get<std::string>());
    o.method = OptimMethod::AdamSpsa;
    o.spsa = preset.params;
    o.budget = preset.params.max_fevals;
  }
  if (j.contains("method")) o.method = optim_method_from_name(j.at("method").get<std::string>());
  o.budget = get_or(j, "budget", o.budget);
  o.restarts = get_or(j, "restarts", o.restarts);
  if (o.budget < 1) fail("optimizer budget must be positive");
  if (o.restarts < 0) fail("optimizer restarts must be >= 0");
  if (j.contains("spsa")) {
    const json& s = j.at("spsa");
    o.spsa.a = get_or(s, "a", o.spsa.a);
    o.spsa.alpha = get_or(s, "alpha", o.spsa.alpha);
    o.spsa.beta1 = get_or(s, "beta1", o.spsa.beta1);
    o.spsa.beta2 = get_or(s, "beta2", o.spsa.beta2);
    o.spsa.c = get_or(s, "c", o.spsa.c);
    o.spsa.gamma_sp = get_or(s, "gamma_sp", o.spsa.gamma_sp);
    o.spsa.lambda = get_or(s, "lambda", o.spsa.lambda);
    o.spsa.use_lambda_decay = get_or(s, "use_lambda_decay", o.spsa.use_lambda_decay);
    o.spsa.stability = get_or(s, "stability", o.spsa.stability);
    if (s.contains("stages")) o.spsa.stages = s.at("stages").get<std::vector<int>>();
    if (s.contains("mode")) {
      const std::string mode = s.at("mode").get<std::string>();
      if (mode == "reset") {
        o.spsa.mode = StageMode::Reset;
      } else if (mode == "continuous") {
        o.spsa.mode = StageMode::Continuous;
      } else {
        fail("spsa mode must be reset or continuous");
      }
    }
    o.spsa.max_fevals = get_or(s, "max_fevals", o.budget);
  }
  return o;
}

std::optional<NoiseSpec> parse_noise(const json& j) {
  if (!j.contains("noise")) return std::nullopt;
  const json& n = j.at("noise");
  const double dep1 = get_or(n, "one_qubit_depolarizing", 0.0);
  const double dep2 = get_or(n, "two_qubit_depolarizing", 0.0);
  const double damp = get_or(n, "amplitude_damping", 0.0);
  const double rx = get_or(n, "random_x", 0.0);
  std::optional<std::int64_t> shots;
  if (n.contains("shots")) shots = n.at("shots").get<std::int64_t>();
  NoiseSpec spec = NoiseSpec::make(dep1, dep2, damp, rx, shots);
  if (spec.is_trivial() && !spec.shots) return std::nullopt;
  return spec;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("not valid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  if (!j.contains("task")) fail("missing task");
  cfg.task = task_from_name(j.at("task").get<std::string>());

  if (j.contains("problem")) {
    const json& p = j.at("problem");
    if (p.contains("state")) {
      const json& s = p.at("state");
      const std::string kind = s.at("kind").get<std::string>();
      if (kind == "haar_mixed") {
        cfg.problem.haar_qubits = s.at("qubits").get<int>();
        cfg.problem.haar_seed = get_or<std::uint64_t>(s, "seed", 0);
      } else if (kind == "heisenberg_reduced") {
        cfg.problem.heisenberg_reduced_spins = s.at("spins").get<int>();
        cfg.problem.heisenberg_keep = s.at("keep").get<std::vector<int>>();
      } else {
        fail("unknown state kind: " + kind);
      }
    }
    if (p.contains("hamiltonian_file")) {
      cfg.problem.hamiltonian_file = p.at("hamiltonian_file").get<std::string>();
      if (!std::filesystem::exists(*cfg.problem.hamiltonian_file)) {
        fail("hamiltonian_file does not exist: " + *cfg.problem.hamiltonian_file);
      }
    }
    if (p.contains("heisenberg")) cfg.problem.heisenberg_spins = p.at("heisenberg").get<int>();
    if (p.contains("ideal")) cfg.certify.ideal = parse_channel(p.at("ideal"));
    if (p.contains("candidate")) cfg.certify.candidate = parse_channel(p.at("candidate"));
    cfg.certify.m = get_or(p, "m", 0);
    cfg.certify.layers = get_or(p, "layers", 3);
    if (p.contains("entangler")) {
      cfg.certify.entangler = gate_kind_from_name(p.at("entangler").get<std::string>());
    }
    cfg.certify.vqsd_threshold = get_or(p, "vqsd_threshold", 1e-5);
    cfg.bench.max_layers = get_or(p, "max_layers", 3);
    if (p.contains("flavor")) {
      cfg.bench.flavor = lhea_flavor_from_name(p.at("flavor").get<std::string>());
    }
  }

  switch (cfg.task) {
    case TaskKind::Vqsd:
    case TaskKind::RandomSearch:
    case TaskKind::BenchLhea:
      if (!cfg.problem.haar_qubits && !cfg.problem.heisenberg_reduced_spins &&
          !cfg.problem.hamiltonian_file && !cfg.problem.heisenberg_spins) {
        fail("task needs a problem.state or Hamiltonian source");
      }
      break;
    case TaskKind::Vqe:
      if (!cfg.problem.hamiltonian_file && !cfg.problem.heisenberg_spins) {
        fail("vqe needs problem.hamiltonian_file or problem.heisenberg");
      }
      break;
    case TaskKind::Certify:
      if (cfg.certify.ideal.kind.empty() || cfg.certify.candidate.kind.empty()) {
        fail("certify needs problem.ideal and problem.candidate channels");
      }
      break;
  }

  if (j.contains("env")) {
    const json& e = j.at("env");
    cfg.env.max_steps = get_or(e, "max_steps", cfg.env.max_steps);
    cfg.env.max_depth = get_or(e, "max_depth", 0);
    cfg.env.threshold = get_or(e, "threshold", cfg.env.threshold);
    cfg.env.success_bonus = get_or(e, "success_bonus", cfg.env.success_bonus);
    if (e.contains("reward")) {
      const std::string r = e.at("reward").get<std::string>();
      if (r == "dense_log") {
        cfg.env.reward_kind = RewardKind::DenseLog;
      } else if (r == "sparse") {
        cfg.env.reward_kind = RewardKind::Sparse;
      } else {
        fail("reward must be dense_log or sparse");
      }
    }
    if (e.contains("append_cost")) {
      cfg.env.append_cost_to_observation = e.at("append_cost").get<bool>();
    } else {
      cfg.env.append_cost_to_observation = cfg.task == TaskKind::Vqe;
    }
    if (e.contains("random_halting")) {
      const json& h = e.at("random_halting");
      RandomHalting rh;
      if (h.contains("p") && h.contains("n_s")) {
        rh.p = h.at("p").get<double>();
        rh.n_s = h.at("n_s").get<int>();
      } else {
        // Default: mean n_s / p equals max_steps.
        rh.n_s = std::max(1, cfg.env.max_steps / 2);
        rh.p = static_cast<double>(rh.n_s) / static_cast<double>(cfg.env.max_steps);
      }
      if (!(rh.p > 0.0 && rh.p <= 1.0) || rh.n_s < 1) fail("invalid random_halting parameters");
      cfg.env.random_halting = rh;
    }
    if (e.contains("allowed_cnot_pairs")) {
      for (const auto& pair : e.at("allowed_cnot_pairs")) {
        cfg.env.allowed_cnot_pairs.emplace_back(pair[0].get<int>(), pair[1].get<int>());
      }
    }
    if (cfg.env.max_steps < 1) fail("env.max_steps must be >= 1");
  } else if (cfg.task == TaskKind::Vqe) {
    cfg.env.append_cost_to_observation = true;
  }

  if (j.contains("curriculum")) {
    const json& c = j.at("curriculum");
    CurriculumConfig cc;
    cc.initial_threshold = get_or(c, "initial_threshold", cc.initial_threshold);
    cc.amortization = get_or(c, "amortization", cc.amortization);
    cc.amortization_decrement = get_or(c, "amortization_decrement", cc.amortization_decrement);
    cc.shift_radius = get_or(c, "shift_radius", cc.shift_radius);
    cc.greedy_period = get_or(c, "greedy_period", cc.greedy_period);
    cc.fail_streak_limit = get_or(c, "fail_streak_limit", cc.fail_streak_limit);
    if (cc.initial_threshold <= 0.0 || cc.greedy_period < 1) fail("invalid curriculum block");
    cfg.curriculum = cc;
  }

  if (j.contains("agent")) {
    const json& a = j.at("agent");
    cfg.agent.gamma = get_or(a, "gamma", cfg.agent.gamma);
    cfg.agent.epsilon_decay = get_or(a, "epsilon_decay", cfg.agent.epsilon_decay);
    cfg.agent.epsilon_floor = get_or(a, "epsilon_floor", cfg.agent.epsilon_floor);
    cfg.agent.replay_capacity =
        get_or<std::size_t>(a, "replay_capacity", cfg.agent.replay_capacity);
    cfg.agent.batch_size = get_or(a, "batch_size", cfg.agent.batch_size);
    cfg.agent.learning_rate = get_or(a, "learning_rate", cfg.agent.learning_rate);
    cfg.agent.target_update_period =
        get_or(a, "target_update_period", cfg.agent.target_update_period);
    cfg.agent.soft_target = get_or(a, "soft_target", cfg.agent.soft_target);
    cfg.agent.tau = get_or(a, "tau", cfg.agent.tau);
    cfg.agent.n_step = get_or(a, "n_step", cfg.agent.n_step);
    cfg.agent.dropout = get_or(a, "dropout", cfg.agent.dropout);
    if (a.contains("hidden_sizes")) {
      cfg.agent.hidden_sizes = a.at("hidden_sizes").get<std::vector<int>>();
    }
    if (cfg.agent.gamma < 0.0 || cfg.agent.gamma >= 1.0) fail("agent.gamma must be in [0, 1)");
    if (cfg.agent.batch_size < 1) fail("agent.batch_size must be positive");
    if (cfg.agent.n_step < 1) fail("agent.n_step must be >= 1");
  }

  if (j.contains("optimizer")) cfg.optimizer = parse_optimizer(j.at("optimizer"));
  cfg.env.optimizer = cfg.optimizer;
  cfg.noise = parse_noise(j);
  if (cfg.noise) cfg.env.noise = cfg.noise;

  cfg.episodes = get_or<long>(j, "episodes", 0);
  if (cfg.episodes < 0) fail("episodes must be >= 0");
  if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty()) {
    fail("seeds must be a nonempty array");
  }
  for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
  cfg.output_dir = get_or<std::string>(j, "output_dir", "runs/out");

  cfg.canonical_json = j.dump();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

VariationalProblem build_problem(const ExperimentConfig& config) {
  const ProblemSpec& p = config.problem;
  if (p.haar_qubits) {
    std::mt19937_64 rng(p.haar_seed);
    return VqsdProblem::make(random_density_matrix(*p.haar_qubits, rng));
  }
  if (p.heisenberg_reduced_spins) {
    const PauliHamiltonian h = heisenberg(*p.heisenberg_reduced_spins);
    const Spectrum spectrum = exact_spectrum(h);
    const QuantumState ground = QuantumState::from_vector(spectrum.eigenvectors.col(0));
    const std::set<int> keep(p.heisenberg_keep.begin(), p.heisenberg_keep.end());
    return VqsdProblem::make(partial_trace(ground, keep));
  }
  if (p.hamiltonian_file) {
    return VqeProblem::make(load_hamiltonian(*p.hamiltonian_file));
  }
  if (p.heisenberg_spins) {
    return VqeProblem::make(heisenberg(*p.heisenberg_spins));
  }
  throw std::invalid_argument("config has no problem source");
}

Channel build_channel(const ChannelSpec& spec) {
  if (spec.kind == "identity") return Channel::identity(spec.qubits);
  if (spec.kind == "depolarizing") {
    if (spec.qubits == 1) {
      return Channel::from_kraus(1, depolarizing(spec.gamma, 1).operators);
    }
    return Channel::from_local(depolarizing(spec.gamma, 1), spec.qubits);
  }
  if (spec.kind == "amplitude_damping") {
    if (spec.qubits == 1) {
      return Channel::from_kraus(1, amplitude_damping(spec.gamma).operators);
    }
    return Channel::from_local(amplitude_damping(spec.gamma), spec.qubits);
  }
  if (spec.kind == "unitary_circuit") {
    Circuit c(spec.qubits);
    for (const auto& g : spec.gates) c.append(g);
    return Channel::from_circuit(c);
  }
  if (spec.kind == "random") {
    std::mt19937_64 rng(spec.seed);
    const int rank = spec.rank > 0 ? spec.rank : (1 << (2 * spec.qubits));
    return Channel::random(spec.qubits, rank, rng);
  }
  if (spec.kind == "composition") {
    std::vector<Channel> steps;
    for (const auto& s : spec.steps) steps.push_back(build_channel(s));
    return Channel::composition(steps);
  }
  throw std::invalid_argument("unknown channel kind: " + spec.kind);
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config.canonical_json) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string code_version() { return "qas 0.1.0"; }

}  // namespace qas
