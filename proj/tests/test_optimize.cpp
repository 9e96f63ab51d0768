#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qas/optimize.hpp"
#include "qas/random.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace qas;

namespace {

ObjectiveHandle quadratic(int dim, int budget) {
  return {[](const Eigen::VectorXd& x) { return x.squaredNorm(); }, dim, budget};
}

// Smallest budget (on a 20-feval grid) at which the optimizer's reported
// best reaches `tol`; the paired-seed comparison below uses this as the
// fevals-to-tolerance measurement.
int min_budget_to(double tol, bool adam, const SpsaParams& base, std::uint64_t seed) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(10);
  for (int budget = 20; budget <= 4000; budget += 20) {
    ObjectiveHandle obj = quadratic(10, budget);
    SpsaParams p = base;
    if (adam) {
      const int s1 = static_cast<int>(budget * 0.715);
      const int s2 = static_cast<int>(budget * 0.214);
      p.stages = {s1, s2, budget - s1 - s2};
    } else {
      p.stages.clear();
    }
    std::mt19937_64 rng(seed);
    const OptimResult r =
        adam ? adam_spsa_minimize(obj, x0, p, rng) : spsa_minimize(obj, x0, p, rng);
    if (r.best_value <= tol) return budget;
  }
  return 1 << 20;
}

}  // namespace

TEST_CASE("spsa_minimize") {
  SUBCASE("10-d quadratic reaches 1e-3 within 2000 fevals") {
    SpsaParams p;
    p.a = 0.2;
    p.alpha = 0.602;
    p.c = 0.1;
    p.gamma_sp = 0.101;
    std::mt19937_64 rng(42);
    const OptimResult r = spsa_minimize(quadratic(10, 2000), Eigen::VectorXd::Ones(10), p, rng);
    CHECK(r.best_value < 1e-3);
    CHECK(r.fevals_used <= 2000);
  }
  SUBCASE("constant objective stays put") {
    ObjectiveHandle obj{[](const Eigen::VectorXd&) { return 3.5; }, 4, 100};
    SpsaParams p;
    std::mt19937_64 rng(1);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(4, 2.0);
    const OptimResult r = spsa_minimize(obj, x0, p, rng);
    CHECK(r.best_value == doctest::Approx(3.5));
    // Zero gradient estimates: the iterate never moves, so every sampled
    // point sits within one perturbation radius of x0.
    CHECK((r.best_point - x0).cwiseAbs().maxCoeff() <= p.c + 1e-12);
  }
  SUBCASE("budget 2 is exactly one gradient estimate") {
    SpsaParams p;
    std::mt19937_64 rng(3);
    const OptimResult r = spsa_minimize(quadratic(3, 2), Eigen::VectorXd::Ones(3), p, rng);
    CHECK(r.fevals_used == 2);
  }
  SUBCASE("budget below 2 throws") {
    SpsaParams p;
    std::mt19937_64 rng(3);
    CHECK_THROWS(spsa_minimize(quadratic(3, 1), Eigen::VectorXd::Ones(3), p, rng));
  }
}

TEST_CASE("adam_spsa_minimize") {
  SUBCASE("LiH-4 preset carries the published hyperparameters") {
    const SpsaPreset preset = spsa_preset("LiH-4");
    CHECK(preset.params.a == doctest::Approx(1.2324));
    CHECK(preset.params.alpha == doctest::Approx(0.9709));
    CHECK(preset.params.beta1 == doctest::Approx(0.6114));
    CHECK(preset.params.beta2 == doctest::Approx(0.9326));
    CHECK(preset.params.c == doctest::Approx(0.2215));
    CHECK(preset.params.gamma_sp == doctest::Approx(0.1485));
    REQUIRE(preset.params.stages.size() == 3);
    CHECK(preset.params.stages[0] == 1191);
    CHECK(preset.params.stages[1] == 357);
    CHECK(preset.params.stages[2] == 119);
    CHECK(preset.shots == 1000000);
    CHECK_THROWS(spsa_preset("He-9"));
  }
  SUBCASE("runs the preset schedule within budget") {
    const SpsaPreset preset = spsa_preset("LiH-4");
    std::mt19937_64 rng(7);
    ObjectiveHandle obj = quadratic(6, preset.params.max_fevals);
    const OptimResult r =
        adam_spsa_minimize(obj, Eigen::VectorXd::Ones(6), preset.params, rng);
    CHECK(r.fevals_used <= preset.params.max_fevals);
    // The preset is tuned for noisy molecular landscapes; on this sanity
    // quadratic it should still shrink the start value (6.0) a lot.
    CHECK(r.best_value < 0.1);
  }
  SUBCASE("empty stage list throws") {
    SpsaParams p;
    p.stages.clear();
    std::mt19937_64 rng(5);
    CHECK_THROWS(adam_spsa_minimize(quadratic(3, 100), Eigen::VectorXd::Ones(3), p, rng));
  }
  SUBCASE("single stage over the whole budget degenerates to one schedule") {
    SpsaParams p;
    p.a = 0.2;
    p.stages = {400};
    p.mode = StageMode::Continuous;
    std::mt19937_64 rng(11);
    const OptimResult r = adam_spsa_minimize(quadratic(5, 400), Eigen::VectorXd::Ones(5), p, rng);
    CHECK(r.fevals_used <= 400);
    CHECK(r.best_value < 0.5);
  }
  SUBCASE("3-stage Adam-SPSA beats plain SPSA on median fevals-to-1e-2") {
    // Identical (a, alpha, c, gamma_sp); aggressive gains as in the
    // published hyperparameter table.
    SpsaParams p;
    p.a = 2.5;
    p.alpha = 0.9;
    p.c = 0.1;
    p.gamma_sp = 0.1;
    p.beta1 = 0.9;
    p.beta2 = 0.999;
    p.mode = StageMode::Reset;
    std::vector<int> plain, adam;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      plain.push_back(min_budget_to(1e-2, false, p, seed));
      adam.push_back(min_budget_to(1e-2, true, p, seed));
    }
    std::sort(plain.begin(), plain.end());
    std::sort(adam.begin(), adam.end());
    CHECK(adam[10] < plain[10]);
  }
}

TEST_CASE("simplex_minimize") {
  SUBCASE("1-d quadratic from x0 = 3") {
    ObjectiveHandle obj = quadratic(1, 200);
    const OptimResult r = simplex_minimize(obj, Eigen::VectorXd::Constant(1, 3.0), 200);
    CHECK(std::abs(r.best_point(0)) < 1e-6);
    CHECK(r.fevals_used <= 200);
  }
  SUBCASE("constant objective terminates at budget") {
    ObjectiveHandle obj{[](const Eigen::VectorXd&) { return 1.25; }, 2, 60};
    const OptimResult r = simplex_minimize(obj, Eigen::VectorXd::Zero(2), 60);
    CHECK(r.best_value == doctest::Approx(1.25));
    CHECK(r.fevals_used <= 60);
  }
  SUBCASE("2-d Rosenbrock under 1e-2 within 2000 fevals") {
    ObjectiveHandle obj{[](const Eigen::VectorXd& x) {
                          const double a = 1.0 - x(0);
                          const double b = x(1) - x(0) * x(0);
                          return a * a + 100.0 * b * b;
                        },
                        2, 2000};
    const OptimResult r = simplex_minimize(obj, Eigen::VectorXd::Constant(2, -1.0), 2000);
    CHECK(r.best_value < 1e-2);
  }
}

TEST_CASE("optimize result invariants") {
  std::mt19937_64 rng(2025);
  SpsaParams p;
  p.a = 0.2;
  const auto check_result = [](const OptimResult& r, int budget) {
    CHECK(r.fevals_used <= budget);
    bool non_increasing = true;
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      non_increasing = non_increasing && r.trace[i] <= r.trace[i - 1];
    }
    CHECK(non_increasing);
    if (!r.trace.empty()) {
      CHECK(r.best_value == doctest::Approx(*std::min_element(r.trace.begin(), r.trace.end())));
    }
  };
  check_result(spsa_minimize(quadratic(6, 500), Eigen::VectorXd::Ones(6), p, rng), 500);
  check_result(simplex_minimize(quadratic(6, 500), Eigen::VectorXd::Ones(6), 500), 500);

  SUBCASE("gain sequences decrease and stay positive") {
    for (long k = 0; k < 1000; ++k) {
      const double a_k = p.a / std::pow(double(k) + 1.0, p.alpha);
      const double a_next = p.a / std::pow(double(k) + 2.0, p.alpha);
      const double c_k = p.c / std::pow(double(k) + 1.0, p.gamma_sp);
      const double c_next = p.c / std::pow(double(k) + 2.0, p.gamma_sp);
      CHECK(a_next < a_k);
      CHECK(c_next < c_k);
      CHECK(c_k > 0.0);
    }
  }
  SUBCASE("identical seeds give bit-identical results") {
    std::mt19937_64 a(99), b(99);
    const OptimResult ra = spsa_minimize(quadratic(8, 600), Eigen::VectorXd::Ones(8), p, a);
    const OptimResult rb = spsa_minimize(quadratic(8, 600), Eigen::VectorXd::Ones(8), p, b);
    CHECK(ra.best_value == rb.best_value);
    CHECK((ra.best_point - rb.best_point).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ra.trace == rb.trace);
  }
}

TEST_CASE("optimizer-path evaluation matches the reference costs") {
  // optimize_angles with a single-evaluation budget and one init hint
  // probes the compiled evaluator at an exact point.
  std::mt19937_64 rng(123);
  const auto probe = [](const VariationalProblem& problem, const Circuit& c,
                        const Eigen::VectorXd& x, const NoiseSpec* noise) {
    OptimizeOptions opts;
    opts.method = OptimMethod::Simplex;
    opts.budget = 1;
    opts.restarts = 0;
    opts.init_hints = {x};
    std::mt19937_64 local(7);
    return optimize_angles(problem, c, opts, local, noise).best_value;
  };

  SUBCASE("noiseless vqsd and vqe") {
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 2 + static_cast<int>(trial % 2);
      const Circuit c = random_circuit(n, 10, rng);
      Eigen::VectorXd x(c.parameter_count());
      std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = angle(rng);
      const std::vector<double> angles(x.data(), x.data() + x.size());

      const VariationalProblem vqsd = VqsdProblem::make(random_density_matrix(n, rng));
      CHECK(probe(vqsd, c, x, nullptr) ==
            doctest::Approx(vqsd_cost(std::get<VqsdProblem>(vqsd), c, angles)).epsilon(1e-12));

      const VariationalProblem vqe = VqeProblem::make(heisenberg(n == 2 ? 2 : 4));
      if (std::get<VqeProblem>(vqe).hamiltonian->num_qubits() == n) {
        CHECK(probe(vqe, c, x, nullptr) ==
              doctest::Approx(vqe_energy(std::get<VqeProblem>(vqe), c, angles)).epsilon(1e-12));
      }
    }
  }
  SUBCASE("noisy PTM path") {
    const NoiseSpec noise = NoiseSpec::make(1.45e-3, 2.30e-2, 0.01, 0.0, std::nullopt);
    for (int trial = 0; trial < 20; ++trial) {
      const Circuit c = random_circuit(2, 8, rng);
      Eigen::VectorXd x(c.parameter_count());
      std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = angle(rng);
      const std::vector<double> angles(x.data(), x.data() + x.size());

      const VariationalProblem vqe = VqeProblem::make(heisenberg(2));
      CHECK(probe(vqe, c, x, &noise) ==
            doctest::Approx(vqe_energy(std::get<VqeProblem>(vqe), c, angles, &noise))
                .epsilon(1e-10));

      const VariationalProblem vqsd = VqsdProblem::make(random_density_matrix(2, rng));
      CHECK(probe(vqsd, c, x, &noise) ==
            doctest::Approx(vqsd_cost(std::get<VqsdProblem>(vqsd), c, angles, &noise))
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("optimize_angles") {
  std::mt19937_64 rng(31);
  const VqeProblem problem = VqeProblem::make(parse_hamiltonian("1.0 Z\n0.2 X"));

  SUBCASE("zero-parameter circuit is a single evaluation") {
    OptimizeOptions opts;
    const OptimResult r = optimize_angles(VariationalProblem{problem}, Circuit(1), opts, rng);
    CHECK(r.fevals_used == 1);
    CHECK(r.best_value == doctest::Approx(1.0));
  }
  SUBCASE("restart accounting sums the runs") {
    Circuit c(1);
    c.append(Gate::ry(0, 0.0));
    OptimizeOptions opts;
    opts.method = OptimMethod::Simplex;
    opts.budget = 50;
    opts.restarts = 3;
    const OptimResult r = optimize_angles(VariationalProblem{problem}, c, opts, rng);
    CHECK(r.fevals_used > 50);       // more than one run contributed
    CHECK(r.fevals_used <= 3 * 50);  // and each respected its per-run budget
  }
  SUBCASE("finds the ground state of a 1-qubit Hamiltonian") {
    Circuit c(1);
    c.append(Gate::ry(0, 0.0));
    c.append(Gate::rz(0, 0.0));
    OptimizeOptions opts;
    opts.method = OptimMethod::Simplex;
    opts.budget = 300;
    opts.restarts = 3;
    const OptimResult r = optimize_angles(VariationalProblem{problem}, c, opts, rng);
    CHECK(r.best_value == doctest::Approx(*problem.ground_truth).epsilon(1e-6));
  }
}
