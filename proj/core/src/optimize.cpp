#include "qas/optimize.hpp"

#include "objective_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qas {

SpsaPreset spsa_preset(const std::string& name) {
  SpsaPreset p;
  SpsaParams& s = p.params;
  if (name == "H2-2") {
    s.a = 1.2104; s.alpha = 0.9531; s.beta1 = 0.9414; s.beta2 = 0.9983;
    s.c = 0.1039; s.gamma_sp = 0.0984; s.lambda = 0.9277;
    s.max_fevals = 500; s.stages = {500};
    p.shots = 1000;
  } else if (name == "H2-3") {
    s.a = 0.5188; s.alpha = 0.9859; s.beta1 = 0.716; s.beta2 = 0.6265;
    s.c = 0.0938; s.gamma_sp = 0.0974; s.lambda = 0.6483;
    s.max_fevals = 500; s.stages = {500};
    p.shots = 10000;
  } else if (name == "LiH-4") {
    s.a = 1.2324; s.alpha = 0.9709; s.beta1 = 0.6114; s.beta2 = 0.9326;
    s.c = 0.2215; s.gamma_sp = 0.1485; s.lambda = 0.9772;
    s.stages = {1191, 357, 119};
    s.max_fevals = 1191 + 357 + 119;
    p.shots = 1000000;
  } else if (name == "LiH-6") {
    s.a = 1.7564; s.alpha = 0.8365; s.beta1 = 0.6841; s.beta2 = 0.9048;
    s.c = 0.1068; s.gamma_sp = 0.1549; s.lambda = 0.1223;
    s.stages = {1430, 429, 143};
    s.max_fevals = 1430 + 429 + 143;
    p.shots = 100000000;
  } else {
    throw std::invalid_argument("unknown SPSA preset: " + name);
  }
  return p;
}

namespace {

void check_dimension(const ObjectiveHandle& obj, const Eigen::VectorXd& x0) {
  if (x0.size() != obj.dimension) {
    throw std::invalid_argument("start point dimension does not match objective");
  }
}

struct BestTracker {
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd point;

  void offer(double v, const Eigen::VectorXd& x) {
    if (v < value) {
      value = v;
      point = x;
    }
  }
};

// Shared SPSA loop; with_adam selects the moment-accumulator update.
OptimResult spsa_loop(const ObjectiveHandle& obj, const Eigen::VectorXd& x0,
                      const SpsaParams& params, std::mt19937_64& rng, bool with_adam) {
  check_dimension(obj, x0);
  if (obj.budget < 2) throw std::invalid_argument("SPSA needs a budget of at least 2");
  if (!(params.a > 0.0) || !(params.c > 0.0) || params.alpha < 0.0 || params.gamma_sp < 0.0 ||
      params.beta1 < 0.0 || params.beta1 >= 1.0 || params.beta2 < 0.0 || params.beta2 >= 1.0) {
    throw std::invalid_argument("SPSA hyperparameters out of range");
  }

  std::vector<int> stages = params.stages;
  if (with_adam && stages.empty()) {
    throw std::invalid_argument("adam_spsa_minimize needs a nonempty stage list");
  }
  if (stages.empty()) stages = {obj.budget};
  const int stage_total = std::accumulate(stages.begin(), stages.end(), 0);
  if (stage_total > obj.budget) {
    throw std::invalid_argument("stage budgets exceed the objective budget");
  }

  OptimResult out;
  BestTracker best;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
  constexpr double kAdamEps = 1e-8;
  std::bernoulli_distribution coin(0.5);

  int fevals = 0;
  long adam_t = 0;
  long k_continuous = 0;
  // One evaluation stays reserved for the final iterate (see below).
  const int loop_budget = obj.budget > 2 ? obj.budget - 1 : obj.budget;
  for (int stage = 0; stage < static_cast<int>(stages.size()); ++stage) {
    const int stage_budget = stages[static_cast<std::size_t>(stage)];
    int used = 0;
    long k = params.mode == StageMode::Reset ? 0 : k_continuous;
    while (used + 2 <= stage_budget && fevals + 2 <= loop_budget) {
      const double decay = params.use_lambda_decay ? std::pow(params.lambda, double(k)) : 1.0;
      const double a_k =
          decay * params.a / std::pow(double(k) + 1.0 + params.stability, params.alpha);
      const double c_k = params.c / std::pow(double(k) + 1.0, params.gamma_sp);

      Eigen::VectorXd delta(x.size());
      for (Eigen::Index i = 0; i < delta.size(); ++i) delta(i) = coin(rng) ? 1.0 : -1.0;

      const Eigen::VectorXd xp = x + c_k * delta;
      const Eigen::VectorXd xm = x - c_k * delta;
      const double fp = obj.evaluate(xp);
      const double fm = obj.evaluate(xm);
      fevals += 2;
      used += 2;
      best.offer(fp, xp);
      best.offer(fm, xm);

      const Eigen::VectorXd grad = ((fp - fm) / (2.0 * c_k)) * delta.cwiseInverse();
      if (with_adam) {
        ++adam_t;
        m = params.beta1 * m + (1.0 - params.beta1) * grad;
        v = params.beta2 * v + (1.0 - params.beta2) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(params.beta1, double(adam_t));
        const double bc2 = 1.0 - std::pow(params.beta2, double(adam_t));
        const Eigen::VectorXd mhat = m / bc1;
        const Eigen::VectorXd vhat = v / bc2;
        const Eigen::VectorXd denom =
            vhat.cwiseSqrt() + Eigen::VectorXd::Constant(x.size(), kAdamEps);
        x -= a_k * mhat.cwiseQuotient(denom);
      } else {
        x -= a_k * grad;
      }
      ++k;
      ++k_continuous;
      out.trace.push_back(best.value);
    }
  }
  // The loop only ever samples perturbed points; spend a leftover
  // evaluation on the final iterate itself when the budget allows.
  if (fevals < obj.budget) {
    const double fx = obj.evaluate(x);
    ++fevals;
    best.offer(fx, x);
    out.trace.push_back(best.value);
  }
  out.best_value = best.value;
  out.best_point = best.point;
  out.fevals_used = fevals;
  return out;
}

}  // namespace

OptimResult spsa_minimize(const ObjectiveHandle& obj, const Eigen::VectorXd& x0,
                          const SpsaParams& params, std::mt19937_64& rng) {
  SpsaParams flat = params;
  flat.stages.clear();  // plain SPSA runs one schedule over the whole budget
  return spsa_loop(obj, x0, flat, rng, /*with_adam=*/false);
}

OptimResult adam_spsa_minimize(const ObjectiveHandle& obj, const Eigen::VectorXd& x0,
                               const SpsaParams& params, std::mt19937_64& rng) {
  return spsa_loop(obj, x0, params, rng, /*with_adam=*/true);
}

OptimResult simplex_minimize(const ObjectiveHandle& obj, const Eigen::VectorXd& x0, int budget) {
  check_dimension(obj, x0);
  const int dim = obj.dimension;
  if (dim < 1) throw std::invalid_argument("simplex needs dimension >= 1");

  OptimResult out;
  BestTracker best;
  int fevals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    const double f = obj.evaluate(x);
    ++fevals;
    best.offer(f, x);
    return f;
  };

  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;
  constexpr double kInitStep = 0.25;
  constexpr double kCollapseTol = 1e-12;

  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;

  auto init_simplex = [&](const Eigen::VectorXd& center) {
    pts.clear();
    vals.clear();
    pts.push_back(center);
    for (int i = 0; i < dim && fevals < budget; ++i) {
      Eigen::VectorXd p = center;
      p(i) += kInitStep * std::max(1.0, std::abs(center(i)));
      pts.push_back(p);
    }
    for (const auto& p : pts) {
      if (fevals >= budget) break;
      vals.push_back(eval(p));
    }
    while (vals.size() < pts.size()) pts.pop_back();
  };

  init_simplex(x0);
  while (fevals < budget && pts.size() == static_cast<std::size_t>(dim) + 1) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> spts(pts.size());
    std::vector<double> svals(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      spts[i] = pts[order[i]];
      svals[i] = vals[order[i]];
    }
    pts = std::move(spts);
    vals = std::move(svals);

    double diameter = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      diameter = std::max(diameter, (pts[i] - pts[0]).norm());
    }
    if (diameter < kCollapseTol) {
      init_simplex(best.point);  // restart around the incumbent
      continue;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
    centroid /= double(dim);

    const Eigen::VectorXd& worst = pts.back();
    const Eigen::VectorXd refl = centroid + kReflect * (centroid - worst);
    if (fevals >= budget) break;
    const double f_refl = eval(refl);

    if (f_refl < vals.front()) {
      const Eigen::VectorXd expd = centroid + kExpand * (refl - centroid);
      if (fevals >= budget) {
        pts.back() = refl;
        vals.back() = f_refl;
        continue;
      }
      const double f_expd = eval(expd);
      if (f_expd < f_refl) {
        pts.back() = expd;
        vals.back() = f_expd;
      } else {
        pts.back() = refl;
        vals.back() = f_refl;
      }
    } else if (f_refl < vals[vals.size() - 2]) {
      pts.back() = refl;
      vals.back() = f_refl;
    } else {
      const bool outside = f_refl < vals.back();
      const Eigen::VectorXd base = outside ? refl : worst;
      const Eigen::VectorXd contr = centroid + kContract * (base - centroid);
      if (fevals >= budget) break;
      const double f_contr = eval(contr);
      if (f_contr < std::min(f_refl, vals.back())) {
        pts.back() = contr;
        vals.back() = f_contr;
      } else {
        for (std::size_t i = 1; i < pts.size() && fevals < budget; ++i) {
          pts[i] = pts.front() + kShrink * (pts[i] - pts.front());
          vals[i] = eval(pts[i]);
        }
      }
    }
    out.trace.push_back(best.value);
  }

  out.best_value = best.value;
  out.best_point = best.point;
  out.fevals_used = fevals;
  return out;
}

OptimMethod optim_method_from_name(const std::string& name) {
  if (name == "simplex") return OptimMethod::Simplex;
  if (name == "spsa") return OptimMethod::Spsa;
  if (name == "adam_spsa") return OptimMethod::AdamSpsa;
  throw std::invalid_argument("unknown optimizer method: " + name);
}

OptimResult optimize_angles(const VariationalProblem& problem, const Circuit& circuit,
                            const OptimizeOptions& options, std::mt19937_64& rng,
                            const NoiseSpec* noise) {
  const int dim = circuit.parameter_count();
  const detail::CompiledObjective compiled(problem, circuit, noise);
  auto evaluate = [&](const Eigen::VectorXd& x) { return compiled.evaluate(x, &rng); };

  if (dim == 0) {
    OptimResult out;
    out.best_value = evaluate(Eigen::VectorXd());
    out.best_point = Eigen::VectorXd();
    out.fevals_used = 1;
    out.trace = {out.best_value};
    return out;
  }

  ObjectiveHandle obj{evaluate, dim, options.budget};
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * M_PI);

  std::vector<Eigen::VectorXd> starts = options.init_hints;
  for (int r = 0; r < options.restarts; ++r) {
    Eigen::VectorXd x0(dim);
    for (int i = 0; i < dim; ++i) x0(i) = uniform(rng);
    starts.push_back(std::move(x0));
  }

  OptimResult best;
  best.best_value = std::numeric_limits<double>::infinity();
  for (const auto& x0 : starts) {
    if (x0.size() != dim) throw std::invalid_argument("init hint dimension mismatch");
    OptimResult r;
    switch (options.method) {
      case OptimMethod::Simplex: r = simplex_minimize(obj, x0, options.budget); break;
      case OptimMethod::Spsa: r = spsa_minimize(obj, x0, options.spsa, rng); break;
      case OptimMethod::AdamSpsa: {
        SpsaParams p = options.spsa;
        if (p.stages.empty()) p.stages = {options.budget};
        ObjectiveHandle capped{evaluate, dim, std::min(options.budget, p.max_fevals)};
        r = adam_spsa_minimize(capped, x0, p, rng);
        break;
      }
    }
    const int used = best.fevals_used + r.fevals_used;
    if (r.best_value < best.best_value) {
      best.best_value = r.best_value;
      best.best_point = r.best_point;
      best.trace = r.trace;
    }
    best.fevals_used = used;
  }
  return best;
}

}  // namespace qas
