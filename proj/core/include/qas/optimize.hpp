#pragma once

#include "qas/vqa.hpp"

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace qas {

/// Budget-bounded objective. `evaluate` must be reentrant; determinism is
/// the caller's responsibility via the rng it threads through.
struct ObjectiveHandle {
  std::function<double(const Eigen::VectorXd&)> evaluate;
  int dimension = 0;
  int budget = 0;
};

enum class StageMode { Reset, Continuous };

struct SpsaParams {
  double a = 0.2;
  double alpha = 0.602;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double c = 0.1;
  double gamma_sp = 0.101;
  double lambda = 1.0;
  /// Stability offset in a_k = a / (k + 1 + stability)^alpha; 0 unless set.
  double stability = 0.0;
  /// Exponential decay of the gain numerator by lambda^k; the table value
  /// is plumbed through but inert unless enabled.
  bool use_lambda_decay = false;
  int max_fevals = 1000;
  std::vector<int> stages;  // per-stage feval budgets for the multistage form
  StageMode mode = StageMode::Reset;
};

/// Hyperparameter presets: H2-2, H2-3, LiH-4, LiH-6 (with paired shot counts).
struct SpsaPreset {
  SpsaParams params;
  std::int64_t shots = 0;
};
SpsaPreset spsa_preset(const std::string& name);

struct OptimResult {
  double best_value = 0.0;
  Eigen::VectorXd best_point;
  int fevals_used = 0;
  std::vector<double> trace;  // running best per iteration, non-increasing
};

/// Plain SPSA: x_{k+1} = x_k - a_k g^, a_k = a/(k+1)^alpha,
/// c_k = c/(k+1)^gamma_sp, g^ from a two-sided Rademacher perturbation
/// (2 evaluations per iteration).
OptimResult spsa_minimize(const ObjectiveHandle& obj, const Eigen::VectorXd& x0,
                          const SpsaParams& params, std::mt19937_64& rng);

/// SPSA gradient fed through Adam first/second-moment accumulators with
/// bias correction. Stage boundaries re-base (Reset) or continue
/// (Continuous) the gain-schedule index; per-stage feval budgets honored.
OptimResult adam_spsa_minimize(const ObjectiveHandle& obj, const Eigen::VectorXd& x0,
                               const SpsaParams& params, std::mt19937_64& rng);

/// Nelder-Mead with coefficients (1, 2, 0.5, 0.5) and restart on simplex
/// collapse; budget-bounded.
OptimResult simplex_minimize(const ObjectiveHandle& obj, const Eigen::VectorXd& x0, int budget);

enum class OptimMethod { Simplex, Spsa, AdamSpsa };

OptimMethod optim_method_from_name(const std::string& name);

struct OptimizeOptions {
  OptimMethod method = OptimMethod::Simplex;
  int restarts = 1;
  int budget = 400;  // fevals per restart
  SpsaParams spsa;
  /// Extra starting points tried in addition to the random restarts
  /// (e.g. a warm start from the previous step's angles).
  std::vector<Eigen::VectorXd> init_hints;
};

using VariationalProblem = std::variant<VqsdProblem, VqeProblem>;

/// Best result over `restarts` uniform-random initializations in [0, 2pi)^d
/// plus any init hints. A zero-rotation circuit is a single evaluation.
OptimResult optimize_angles(const VariationalProblem& problem, const Circuit& circuit,
                            const OptimizeOptions& options, std::mt19937_64& rng,
                            const NoiseSpec* noise = nullptr);

}  // namespace qas
