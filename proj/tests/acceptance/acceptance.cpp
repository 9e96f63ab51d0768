// Acceptance suite: one test case per criterion, each printing a single
// PASS/FAIL line with the measured numbers. Budgets and tolerances are
// pinned here; nothing is calibrated at run time.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qas/certify.hpp"
#include "qas/config.hpp"
#include "qas/experiment.hpp"
#include "qas/ptm.hpp"
#include "qas/random.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <functional>
#include <thread>

using namespace qas;

namespace {

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[criterion %02d] %s - %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// Fans jobs out to the two-ish cores the acceptance host has; every job
// owns its rng, so per-seed determinism survives the parallelism.
void parallel_for(int jobs, const std::function<void(int)>& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const int workers = static_cast<int>(std::min<unsigned>(hw > 0 ? hw : 1, jobs));
  if (workers <= 1) {
    for (int j = 0; j < jobs; ++j) fn(j);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int j = next.fetch_add(1);
        if (j >= jobs) return;
        fn(j);
      }
    });
  }
  for (auto& t : pool) t.join();
}

constexpr std::uint64_t kVqsdStateSeeds[5] = {11, 22, 33, 44, 55};

RunConfig vqsd_2q_run_config(std::uint64_t run_seed, long episodes) {
  RunConfig rc;
  rc.episodes = episodes;
  rc.seed = run_seed;
  rc.env.max_steps = 20;   // successful circuits use <= 20 gates
  rc.env.threshold = 1e-5;  // thesis setting; success means cost < 2e-5 << 1e-4
  rc.env.reward_kind = RewardKind::DenseLog;
  rc.env.success_bonus = 500.0;
  rc.env.optimizer.method = OptimMethod::Simplex;
  rc.env.optimizer.budget = 400;
  rc.env.optimizer.restarts = 1;
  rc.agent.hidden_sizes = {128, 128, 128};
  rc.agent.batch_size = 32;
  rc.agent.learning_rate = 1e-3;
  return rc;
}

VariationalProblem vqsd_2q_problem(std::uint64_t state_seed) {
  std::mt19937_64 rng(state_seed);
  return VqsdProblem::make(random_density_matrix(2, rng));
}

double vqsd_eigenvalue_error(const VariationalProblem& problem, const BestSolution& best,
                             int top_m) {
  const VqsdProblem& p = std::get<VqsdProblem>(problem);
  Circuit c(p.target.num_qubits());
  for (const auto& g : best.gates) c.append(g);
  const auto [inferred, bits] = eigen_readout(p, c, best.angles);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p.target.to_density());
  std::vector<double> truth(es.eigenvalues().data(),
                            es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(truth.rbegin(), truth.rend());
  return eigenvalue_error(truth, inferred, top_m);
}

}  // namespace

TEST_CASE("criterion-01-vqsd-2q") {
  // 5 Haar-random full-rank mixed states (fixed seeds); the agent must
  // reach cost < 1e-4 within the episode budget on >= 4/5 states with
  // eigenvalue error < 1e-3 and <= 20 gates in the best success.
  const long episodes = 2000;  // within the allowed 5000
  std::array<RunResult, 5> results;
  std::array<VariationalProblem, 5> problems = {
      vqsd_2q_problem(kVqsdStateSeeds[0]), vqsd_2q_problem(kVqsdStateSeeds[1]),
      vqsd_2q_problem(kVqsdStateSeeds[2]), vqsd_2q_problem(kVqsdStateSeeds[3]),
      vqsd_2q_problem(kVqsdStateSeeds[4])};
  parallel_for(5, [&](int i) {
    results[i] = run_experiment(problems[i],
                                vqsd_2q_run_config(9000 + kVqsdStateSeeds[i], episodes));
  });

  int solved = 0;
  std::string detail;
  for (int i = 0; i < 5; ++i) {
    const RunResult& r = results[i];
    const bool reached = r.train_successes + r.test_successes > 0 && r.best.found &&
                         r.best.exact_cost < 1e-4 && r.best.gates.size() <= 20;
    double delta = std::numeric_limits<double>::quiet_NaN();
    if (reached) {
      delta = vqsd_eigenvalue_error(problems[i], r.best, 4);
      if (delta < 1e-3) ++solved;
    }
    detail += fmt("s%llu:%s cost=%.1e dlt=%.1e g=%zu; ",
                  static_cast<unsigned long long>(kVqsdStateSeeds[i]), reached ? "ok" : "miss",
                  r.best.found ? r.best.exact_cost : 1.0, delta, r.best.gates.size());
  }
  const bool pass = solved >= 4;
  report(1, pass, fmt("%d/5 states solved (cost<1e-4, delta<1e-3, <=20 gates); %s", solved,
                      detail.c_str()));
  CHECK(pass);

  // Criterion 3 consumes these runs; persist the success counts.
  std::ofstream handoff("acceptance_c1_successes.txt");
  for (int i = 0; i < 5; ++i) {
    handoff << kVqsdStateSeeds[i] << " " << results[i].train_successes << "\n";
  }
}

TEST_CASE("criterion-02-vqsd-3q-heisenberg") {
  // Reduced 3-qubit state of the 6-spin ring ground state: one successful
  // episode with <= 40 gates whose top-6 eigenvalue error stays under 1e-3.
  const PauliHamiltonian h6 = heisenberg(6);
  const Spectrum spectrum = exact_spectrum(h6);
  const QuantumState ground = QuantumState::from_vector(spectrum.eigenvectors.col(0));
  VariationalProblem problem = VqsdProblem::make(partial_trace(ground, {0, 1, 2}));

  RunConfig rc;
  rc.episodes = 4000;  // within the allowed 1e4
  rc.seed = 777;
  rc.env.max_steps = 40;
  rc.env.threshold = 9e-5;
  rc.env.reward_kind = RewardKind::DenseLog;
  rc.env.success_bonus = 500.0;
  rc.env.optimizer.method = OptimMethod::Simplex;
  rc.env.optimizer.budget = 600;
  rc.env.optimizer.restarts = 1;
  rc.agent.hidden_sizes = {128, 128, 128};
  rc.agent.batch_size = 32;
  rc.stop_after_successes = 1;

  const RunResult r = run_experiment(problem, rc);
  double delta6 = std::numeric_limits<double>::quiet_NaN();
  bool pass = r.best.found && r.train_successes + r.test_successes > 0 &&
              r.best.gates.size() <= 40;
  if (pass) {
    delta6 = vqsd_eigenvalue_error(problem, r.best, 6);
    pass = delta6 < 1e-3;
  }
  report(2, pass,
         fmt("first success at episode %ld, gates=%zu, top-6 error=%.2e (limit 1e-3)",
             r.first_train_success >= 0 ? r.first_train_success : r.first_test_success,
             r.best.gates.size(), delta6));
  CHECK(pass);
}

TEST_CASE("criterion-03-random-search") {
  // Identical seeds and budgets as criterion 1; random action selection
  // must produce strictly fewer successful episodes on every seed.
  const long episodes = 2000;
  std::array<long, 5> agent_successes{};
  {
    std::ifstream handoff("acceptance_c1_successes.txt");
    bool loaded = false;
    if (handoff) {
      loaded = true;
      for (int i = 0; i < 5; ++i) {
        std::uint64_t seed = 0;
        if (!(handoff >> seed >> agent_successes[i])) loaded = false;
      }
    }
    if (!loaded) {
      // Criterion filtered to run alone: redo the agent runs.
      parallel_for(5, [&](int i) {
        const RunResult r = run_experiment(
            vqsd_2q_problem(kVqsdStateSeeds[i]),
            vqsd_2q_run_config(9000 + kVqsdStateSeeds[i], episodes));
        agent_successes[i] = r.train_successes;
      });
    }
  }

  std::array<long, 5> random_successes{};
  parallel_for(5, [&](int i) {
    const RunResult r = random_search_baseline(
        vqsd_2q_problem(kVqsdStateSeeds[i]),
        vqsd_2q_run_config(9000 + kVqsdStateSeeds[i], episodes));
    random_successes[i] = r.train_successes;
  });

  bool pass = true;
  std::string detail;
  for (int i = 0; i < 5; ++i) {
    pass = pass && random_successes[i] < agent_successes[i];
    detail += fmt("s%llu: agent=%ld random=%ld; ",
                  static_cast<unsigned long long>(kVqsdStateSeeds[i]), agent_successes[i],
                  random_successes[i]);
  }
  report(3, pass, "strictly fewer random successes on every seed: " + detail);
  CHECK(pass);
}

TEST_CASE("criterion-04-vqe-curriculum") {
  // Curriculum-driven runs reach energy error < 1.6e-3 on >= 2/3 seeds for
  // heisenberg(2), heisenberg(4) and the shipped sample Pauli file; plus
  // the Rayleigh floor in noiseless mode.
  struct Instance {
    std::string name;
    PauliHamiltonian hamiltonian;
    int max_steps;
    long episodes;
    int budget;
  };
  const std::string sample_path =
      std::string(QAS_SOURCE_DIR) + "/data/hamiltonians/sample_2q.txt";
  std::vector<Instance> instances;
  instances.push_back({"heisenberg(2)", heisenberg(2), 12, 2000, 300});
  instances.push_back({"heisenberg(4)", heisenberg(4), 40, 4000, 600});
  instances.push_back({"sample_2q.txt", load_hamiltonian(sample_path), 12, 2000, 300});

  bool all_pass = true;
  std::string detail;
  for (const auto& inst : instances) {
    const VqeProblem problem = VqeProblem::make(inst.hamiltonian);
    const double target = *problem.ground_truth + 1.6e-3;
    std::array<double, 3> errors{};
    parallel_for(3, [&](int s) {
      RunConfig rc;
      rc.episodes = inst.episodes;
      rc.seed = 100 + static_cast<std::uint64_t>(s);
      rc.env.max_steps = inst.max_steps;
      rc.env.reward_kind = RewardKind::Sparse;
      rc.env.append_cost_to_observation = true;
      rc.env.optimizer.method = OptimMethod::Simplex;
      rc.env.optimizer.budget = inst.budget;
      rc.env.optimizer.restarts = 1;
      rc.agent.hidden_sizes = {128, 128, 128};
      rc.agent.batch_size = 32;
      rc.curriculum = CurriculumConfig{};
      rc.stop_when_cost_below = target;
      const RunResult r = run_experiment(VariationalProblem{problem}, rc);
      errors[s] = r.best.found ? r.best.exact_cost - *problem.ground_truth
                               : std::numeric_limits<double>::infinity();
    });
    int ok = 0;
    for (double e : errors) ok += e < 1.6e-3 ? 1 : 0;
    all_pass = all_pass && ok >= 2;
    detail += fmt("%s: %d/3 seeds under 1.6e-3 (errors %.1e %.1e %.1e); ", inst.name.c_str(),
                  ok, errors[0], errors[1], errors[2]);
  }

  // Rayleigh: noiseless vqe_energy never undercuts the oracle ground
  // energy beyond 1e-9.
  std::mt19937_64 rng(4242);
  const VqeProblem h4 = VqeProblem::make(heisenberg(4));
  bool rayleigh = true;
  for (int trial = 0; trial < 300; ++trial) {
    const Circuit c = random_circuit(4, 12, rng);
    rayleigh = rayleigh && vqe_energy(h4, c, c.angles()) >= *h4.ground_truth - 1e-9;
  }
  all_pass = all_pass && rayleigh;
  detail += rayleigh ? "Rayleigh floor holds" : "Rayleigh floor VIOLATED";

  report(4, all_pass, detail);
  CHECK(all_pass);
}

TEST_CASE("criterion-05-noise-robustness") {
  // 2-qubit VQE under ibmq_mumbai-level depolarizing rates plus 1e4 shots
  // still reaches exact error < 5e-3 on >= 1/3 seeds.
  const std::string sample_path =
      std::string(QAS_SOURCE_DIR) + "/data/hamiltonians/sample_2q.txt";
  const VqeProblem problem = VqeProblem::make(load_hamiltonian(sample_path));
  const double target = *problem.ground_truth + 5e-3;

  std::array<double, 3> errors{};
  parallel_for(3, [&](int s) {
    RunConfig rc;
    rc.episodes = 800;
    rc.seed = 100 + static_cast<std::uint64_t>(s);
    rc.env.max_steps = 10;
    rc.env.reward_kind = RewardKind::Sparse;
    rc.env.append_cost_to_observation = true;
    rc.env.noise = NoiseSpec::make(1.45e-3, 2.30e-2, 0.0, 0.0, 10000);
    rc.env.optimizer.method = OptimMethod::Simplex;
    rc.env.optimizer.budget = 300;
    rc.env.optimizer.restarts = 1;
    rc.agent.hidden_sizes = {64, 64};
    rc.agent.batch_size = 16;
    rc.curriculum = CurriculumConfig{};
    rc.curriculum->greedy_period = 100;
    rc.stop_when_cost_below = target;
    const RunResult r = run_experiment(VariationalProblem{problem}, rc);
    errors[s] = r.best.found ? r.best.exact_cost - *problem.ground_truth
                             : std::numeric_limits<double>::infinity();
  });

  int ok = 0;
  for (double e : errors) ok += e < 5e-3 ? 1 : 0;
  const bool pass = ok >= 1;
  report(5, pass,
         fmt("depolarizing(1q 1.45e-3, 2q 2.30e-2) + 1e4 shots: %d/3 seeds under 5e-3 "
             "(errors %.2e %.2e %.2e)",
             ok, errors[0], errors[1], errors[2]));
  CHECK(pass);
}

TEST_CASE("criterion-06-fidelity-bounds") {
  // SSFB sandwich on 1000 random pairs (squared convention) and TFB
  // sandwich/monotonicity/rank-equality with exact eigenbases.
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> qubit_dist(1, 2);
  bool ssfb_ok = true;
  bool tfb_ok = true;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = qubit_dist(rng);
    const QuantumState rho = random_density_matrix(n, rng);
    const QuantumState sigma = random_density_matrix(n, rng);
    const double f = fidelity_exact(rho, sigma);
    const double f2 = f * f;
    ssfb_ok = ssfb_ok && subfidelity(rho, sigma) <= f2 + 1e-9 &&
              superfidelity(rho, sigma) >= f2 - 1e-9;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.to_density());
    std::vector<double> values;
    std::vector<Eigen::VectorXcd> vectors;
    for (Eigen::Index i = es.eigenvalues().size(); i-- > 0;) {
      values.push_back(std::max(es.eigenvalues()(i), 0.0));
      vectors.push_back(es.eigenvectors().col(i));
    }
    const int dim = static_cast<int>(values.size());
    double prev_lower = -1.0, prev_upper = 2.0;
    for (int m = 1; m <= dim; ++m) {
      const FidelityBounds b = truncated_bounds(values, vectors, sigma, m);
      tfb_ok = tfb_ok && b.lower <= f + 1e-9 && b.upper >= f - 1e-9 &&
               b.lower >= prev_lower - 1e-10 && b.upper <= prev_upper + 1e-10;
      prev_lower = b.lower;
      prev_upper = b.upper;
      if (m == dim) worst_gap = std::max(worst_gap, std::abs(b.lower - f) + std::abs(b.upper - f));
    }
  }
  const bool pass = ssfb_ok && tfb_ok && worst_gap < 1e-8;
  report(6, pass,
         fmt("1000 pairs: SSFB %s, TFB sandwich+monotone %s, full-rank gap %.1e (limit 1e-8)",
             ssfb_ok ? "ok" : "VIOLATED", tfb_ok ? "ok" : "VIOLATED", worst_gap));
  CHECK(pass);
}

TEST_CASE("criterion-07-certification") {
  OptimizeOptions opts;
  opts.method = OptimMethod::Simplex;
  opts.budget = 3000;
  opts.restarts = 10;
  const VqsdEngine engine = lhea_vqsd_engine(3, GateKind::CNOT, opts, 1e-6);

  // Part 1: 100 random channels certified against themselves.
  std::atomic<int> self_ok{0};
  parallel_for(100, [&](int i) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(i));
    const Channel ch = Channel::random(1, 4, rng);
    const CertifyReport r = certify(ch, ch, engine, 4, rng);
    const bool ok = std::abs(r.bounds_per_m.back().lower - 1.0) < 5e-3 &&
                    std::abs(r.bounds_per_m.back().upper - 1.0) < 5e-3;
    if (ok) self_ok.fetch_add(1);
  });

  // Part 2: 100 random ideal/candidate pairs at m = 4.
  std::atomic<int> pair_ok{0};
  parallel_for(100, [&](int i) {
    std::mt19937_64 rng(5000 + static_cast<std::uint64_t>(i));
    const Channel ideal = Channel::random(1, 4, rng);
    const Channel candidate = Channel::random(1, 4, rng);
    const CertifyReport r = certify(ideal, candidate, engine, 4, rng);
    if (std::abs(r.truncated_fidelity_error) < 0.05) pair_ok.fetch_add(1);
  });

  const bool pass = self_ok.load() >= 80 && pair_ok.load() >= 40;
  report(7, pass,
         fmt("self-certification within 5e-3: %d/100 (need 80); |dF| < 5%%: %d/100 (need 40)",
             self_ok.load(), pair_ok.load()));
  CHECK(pass);
}

TEST_CASE("criterion-08-numerical-kernels") {
  bool pass = true;
  std::string detail;

  // MLP gradient vs central finite differences.
  {
    std::mt19937_64 rng(88);
    Mlp net = Mlp::random_init({9, 12, 10, 6}, 0.0, rng);
    Eigen::MatrixXd input(9, 4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index i = 0; i < input.size(); ++i) input.data()[i] = gauss(rng);
    Eigen::VectorXd targets(4);
    targets << 0.2, -0.4, 1.1, 0.7;
    const std::vector<int> actions{0, 3, 5, 2};
    const auto loss_for = [&](const Mlp& m) {
      const Eigen::MatrixXd q = m.forward(input, false);
      double loss = 0.0;
      for (int b = 0; b < 4; ++b) {
        loss += smooth_l1(q(actions[static_cast<std::size_t>(b)], b) - targets(b)) / 4.0;
      }
      return loss;
    };
    Mlp::Cache cache;
    const Eigen::MatrixXd q = net.forward(input, false, nullptr, &cache);
    Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q.rows(), q.cols());
    for (int b = 0; b < 4; ++b) {
      dq(actions[static_cast<std::size_t>(b)], b) =
          smooth_l1_grad(q(actions[static_cast<std::size_t>(b)], b) - targets(b)) / 4.0;
    }
    const Mlp::Gradients grads = net.backward(cache, dq);
    double worst_rel = 0.0;
    std::uniform_int_distribution<std::size_t> layer_dist(0, net.weights().size() - 1);
    int checked = 0;
    while (checked < 100) {
      const std::size_t l = layer_dist(rng);
      std::uniform_int_distribution<Eigen::Index> idx(0, net.weights()[l].size() - 1);
      const Eigen::Index i = idx(rng);
      Mlp plus = net, minus = net;
      plus.weights()[l].data()[i] += 1e-5;
      minus.weights()[l].data()[i] -= 1e-5;
      const double numeric = (loss_for(plus) - loss_for(minus)) / 2e-5;
      const double analytic = grads.w[l].data()[i];
      if (std::abs(numeric) < 1e-8 && std::abs(analytic) < 1e-8) continue;
      worst_rel = std::max(worst_rel,
                           std::abs(numeric - analytic) / std::max(std::abs(numeric), 1e-8));
      ++checked;
    }
    pass = pass && worst_rel < 1e-4;
    detail += fmt("grad rel err %.1e; ", worst_rel);
  }

  // PTM path equals the Kraus path on 200 random noisy circuits.
  {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<int> qubits_dist(1, 3);
    std::uniform_int_distribution<int> depth_dist(1, 10);
    const NoiseSpec noise = NoiseSpec::make(0.02, 0.05, 0.01, 0.015, std::nullopt);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const int n = qubits_dist(rng);
      const Circuit c = random_circuit(n, depth_dist(rng), rng);
      const QuantumState rho = random_density_matrix(n, rng);
      const Eigen::MatrixXcd a = ptm_evolve(c, rho, noise).to_density();
      const Eigen::MatrixXcd b = run_circuit(c, rho, &noise).to_density();
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    }
    pass = pass && worst < 1e-10;
    detail += fmt("PTM-Kraus max diff %.1e; ", worst);
  }

  // Every constructed Kraus set is CPTP within 1e-12.
  {
    double worst = 0.0;
    for (double g : {0.001, 0.1, 0.37, 0.76, 1.0}) {
      for (const KrausChannel& ch : {depolarizing(g, 1), depolarizing(g, 2),
                                     amplitude_damping(g), random_x(g)}) {
        const Eigen::Index d = Eigen::Index{1} << ch.n_qubits;
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
        for (const auto& k : ch.operators) sum += k.adjoint() * k;
        worst = std::max(worst,
                         (sum - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff());
      }
    }
    pass = pass && worst < 1e-12;
    detail += fmt("CPTP err %.1e; ", worst);
  }

  // Encode/decode bijection and prefix consistency on 1000 random circuits.
  {
    bool ok = true;
    for (int n : {2, 3, 4, 5}) {
      for (int i = 0; i < action_count(n); ++i) {
        ok = ok && encode_action(decode_action(i, n), n) == i;
      }
    }
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> qubit_dist(2, 4);
    std::uniform_int_distribution<int> len_dist(1, 12);
    for (int trial = 0; trial < 1000 && ok; ++trial) {
      const int n = qubit_dist(rng);
      const int len = len_dist(rng);
      const Circuit c = random_circuit(n, len, rng);
      Circuit prefix(n);
      Observation prev = encode(prefix, len + 1, n);
      for (const auto& g : c.gates()) {
        prefix.append(g);
        const Observation cur = encode(prefix, len + 1, n);
        int new_ones = 0;
        for (std::size_t k = 0; k < cur.tensor.size(); ++k) {
          if (cur.tensor[k] && !prev.tensor[k]) ++new_ones;
          if (!cur.tensor[k] && prev.tensor[k]) ok = false;
        }
        ok = ok && new_ones == 1;
        prev = cur;
      }
      ok = ok && prev.nonzero_slices() == c.depth();
    }
    pass = pass && ok;
    detail += fmt("encode/decode %s; ", ok ? "ok" : "VIOLATED");
  }

  // Epsilon schedule and smooth-L1 closed forms.
  {
    bool ok = true;
    std::mt19937_64 rng(7);
    AgentConfig cfg;
    cfg.hidden_sizes = {4};
    DdqnAgent agent(2, 3, cfg, rng);
    const std::vector<bool> legal{true, true, true};
    for (int k = 1; k <= 1000; ++k) {
      agent.act({0.0, 1.0}, legal, false, rng);
      ok = ok && agent.epsilon() == std::max(0.05, std::pow(0.99995, k));
    }
    ok = ok && smooth_l1(0.2) == 0.5 * 0.2 * 0.2;
    ok = ok && smooth_l1(2.0) == 2.0 - 0.5;
    ok = ok && smooth_l1(-3.0) == 3.0 - 0.5;
    pass = pass && ok;
    detail += fmt("schedules %s", ok ? "exact" : "VIOLATED");
  }

  report(8, pass, detail);
  CHECK(pass);
}

TEST_CASE("criterion-09-optimizers") {
  // Part 1: plain SPSA to < 1e-3 on the 10-d quadratic within 2000 fevals.
  const auto quadratic = [](int budget) {
    return ObjectiveHandle{[](const Eigen::VectorXd& x) { return x.squaredNorm(); }, 10, budget};
  };
  SpsaParams tuned;
  tuned.a = 0.2;
  tuned.alpha = 0.602;
  tuned.c = 0.1;
  tuned.gamma_sp = 0.101;
  std::mt19937_64 rng(909);
  const OptimResult spsa_run =
      spsa_minimize(quadratic(2000), Eigen::VectorXd::Ones(10), tuned, rng);
  const bool spsa_ok = spsa_run.best_value < 1e-3 && spsa_run.fevals_used <= 2000;

  // Part 2: paired-seed fevals-to-1e-2, 3-stage Adam-SPSA vs plain SPSA
  // with identical (a, alpha, c, gamma_sp).
  SpsaParams shared;
  shared.a = 2.5;
  shared.alpha = 0.9;
  shared.c = 0.1;
  shared.gamma_sp = 0.1;
  shared.beta1 = 0.9;
  shared.beta2 = 0.999;
  shared.mode = StageMode::Reset;
  const auto fevals_to = [&](bool adam, std::uint64_t seed) {
    for (int budget = 20; budget <= 4000; budget += 20) {
      SpsaParams p = shared;
      if (adam) {
        const int s1 = static_cast<int>(budget * 0.715);
        const int s2 = static_cast<int>(budget * 0.214);
        p.stages = {s1, s2, budget - s1 - s2};
      }
      std::mt19937_64 local(seed);
      const OptimResult r = adam
                                ? adam_spsa_minimize(quadratic(budget),
                                                     Eigen::VectorXd::Ones(10), p, local)
                                : spsa_minimize(quadratic(budget), Eigen::VectorXd::Ones(10), p,
                                                local);
      if (r.best_value <= 1e-2) return budget;
    }
    return 1 << 20;
  };
  std::vector<int> plain, adam;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    plain.push_back(fevals_to(false, seed));
    adam.push_back(fevals_to(true, seed));
  }
  std::sort(plain.begin(), plain.end());
  std::sort(adam.begin(), adam.end());
  const bool paired_ok = adam[10] < plain[10];

  const bool pass = spsa_ok && paired_ok;
  report(9, pass,
         fmt("SPSA quadratic best %.2e in %d fevals (need <1e-3); median fevals-to-1e-2 "
             "adam=%d vs plain=%d",
             spsa_run.best_value, spsa_run.fevals_used, adam[10], plain[10]));
  CHECK(pass);
}

TEST_CASE("criterion-10-random-halting") {
  // Sampler mean within 1% of n_s/p at 1e5 draws.
  std::mt19937_64 rng(1010);
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) sum += sample_episode_length(0.5, 10, rng);
  const double mean = sum / draws;
  const bool mean_ok = std::abs(mean - 20.0) / 20.0 < 0.01;

  // Directional effect: with halting enabled on the criterion-1 setup the
  // first success uses no more gates than without, in the median over 5
  // seeds.
  std::array<int, 5> with_halting{};
  std::array<int, 5> without_halting{};
  parallel_for(10, [&](int job) {
    const int i = job % 5;
    const bool halting = job < 5;
    RunConfig rc = vqsd_2q_run_config(9000 + kVqsdStateSeeds[i], 2000);
    rc.stop_after_successes = 1;
    if (halting) {
      rc.env.random_halting = RandomHalting{0.5, 10};  // mean = max_steps
    }
    const RunResult r = run_experiment(vqsd_2q_problem(kVqsdStateSeeds[i]), rc);
    const int gates = r.best.found && (r.train_successes + r.test_successes) > 0
                          ? static_cast<int>(r.best.gates.size())
                          : 1 << 20;
    (halting ? with_halting : without_halting)[i] = gates;
  });
  std::sort(with_halting.begin(), with_halting.end());
  std::sort(without_halting.begin(), without_halting.end());
  const bool median_ok = with_halting[2] <= without_halting[2];

  const bool pass = mean_ok && median_ok;
  report(10, pass,
         fmt("sampler mean %.3f (target 20 within 1%%); median first-success gates "
             "halting=%d vs none=%d",
             mean, with_halting[2], without_halting[2]));
  CHECK(pass);
}
