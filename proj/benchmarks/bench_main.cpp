#include "qas/agent.hpp"
#include "qas/optimize.hpp"
#include "qas/ptm.hpp"
#include "qas/random.hpp"
#include "qas/vqa.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace qas;

void BM_RunCircuitStatevector(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  const Circuit c = random_circuit(n, 20, rng);
  const QuantumState input(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_circuit(c, input));
  }
}
BENCHMARK(BM_RunCircuitStatevector)->Arg(2)->Arg(4)->Arg(6);

void BM_RunCircuitDensity(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  const Circuit c = random_circuit(n, 20, rng);
  const QuantumState input = random_density_matrix(n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_circuit(c, input));
  }
}
BENCHMARK(BM_RunCircuitDensity)->Arg(2)->Arg(3)->Arg(4);

// Kraus-sum evolution versus the fused-PTM path on the same noisy circuit.
void BM_NoisyKraus(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  const Circuit c = random_circuit(n, 20, rng);
  const QuantumState input = random_density_matrix(n, rng);
  const NoiseSpec noise = NoiseSpec::make(1.45e-3, 2.30e-2, 0.0, 0.0, std::nullopt);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_circuit(c, input, &noise));
  }
}
BENCHMARK(BM_NoisyKraus)->Arg(2)->Arg(3)->Arg(4);

void BM_NoisyPtm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  const Circuit c = random_circuit(n, 20, rng);
  const QuantumState input = random_density_matrix(n, rng);
  const NoiseSpec noise = NoiseSpec::make(1.45e-3, 2.30e-2, 0.0, 0.0, std::nullopt);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ptm_evolve(c, input, noise));
  }
}
BENCHMARK(BM_NoisyPtm)->Arg(2)->Arg(3)->Arg(4);

void BM_VqsdCost(benchmark::State& state) {
  std::mt19937_64 rng(11);
  const VqsdProblem problem = VqsdProblem::make(random_density_matrix(2, rng));
  const Circuit c = random_circuit(2, 15, rng);
  const std::vector<double> angles = c.angles();
  for (auto _ : state) {
    benchmark::DoNotOptimize(vqsd_cost(problem, c, angles));
  }
}
BENCHMARK(BM_VqsdCost);

// The per-step global re-optimization is the hot loop of every episode.
void BM_OptimizeAngles(benchmark::State& state) {
  std::mt19937_64 rng(11);
  const VariationalProblem problem = VqsdProblem::make(random_density_matrix(2, rng));
  const Circuit c = random_circuit(2, 15, rng);
  OptimizeOptions opts;
  opts.method = OptimMethod::Simplex;
  opts.budget = 400;
  opts.restarts = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_angles(problem, c, opts, rng));
  }
}
BENCHMARK(BM_OptimizeAngles);

void BM_AgentTrainStep(benchmark::State& state) {
  std::mt19937_64 rng(1);
  AgentConfig cfg;
  cfg.hidden_sizes = {128, 128, 128};
  cfg.batch_size = static_cast<int>(state.range(0));
  DdqnAgent agent(201, 8, cfg, rng);
  std::vector<float> obs(201, 0.0f);
  for (int i = 0; i < 256; ++i) {
    TransitionRecord r;
    r.obs = obs;
    r.action = i % 8;
    r.reward = 0.1;
    r.next_obs = obs;
    r.next_legal = std::vector<std::uint8_t>(8, 1);
    r.done = i % 5 == 0;
    agent.observe(std::move(r));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(agent.train_step(rng));
  }
}
BENCHMARK(BM_AgentTrainStep)->Arg(16)->Arg(32);

void BM_MlpForward(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const Mlp net = Mlp::random_init({201, 128, 128, 128, 8}, 0.0, rng);
  const Eigen::MatrixXd batch = Eigen::MatrixXd::Random(201, 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(batch, false));
  }
}
BENCHMARK(BM_MlpForward);

}  // namespace

BENCHMARK_MAIN();
