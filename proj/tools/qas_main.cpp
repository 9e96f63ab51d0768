#include "qas/config.hpp"
#include "qas/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

int worker_count(std::size_t jobs) {
  if (const char* env = std::getenv("QAS_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return std::min<std::size_t>(w, jobs);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min<std::size_t>(hw > 0 ? hw : 1, jobs));
}

std::string seed_dir(const std::string& out, std::uint64_t seed) {
  return out + "/seed_" + std::to_string(seed);
}

json gates_to_json(const std::vector<qas::Gate>& gates) {
  json arr = json::array();
  for (const auto& g : gates) {
    json item = json::array();
    item.push_back(qas::gate_name(g.kind));
    for (int q : g.qubits) item.push_back(q);
    if (g.angle) item.push_back(*g.angle);
    arr.push_back(item);
  }
  return arr;
}

void write_manifest(const std::string& dir, const qas::ExperimentConfig& cfg,
                    const std::string& started, const std::string& finished) {
  json m;
  std::ostringstream hash;
  hash << std::hex << qas::config_hash(cfg);
  m["config_hash"] = hash.str();
  m["code_version"] = qas::code_version();
  m["task"] = qas::task_name(cfg.task);
  m["started_at"] = started;
  if (!finished.empty()) m["finished_at"] = finished;
  fs::create_directories(dir);
  std::ofstream f(dir + "/manifest.json");
  f << m.dump(2) << "\n";
}

void write_summary(const std::string& dir, std::uint64_t seed,
                   const qas::VariationalProblem& problem, const qas::RunResult& result) {
  (void)problem;
  json s;
  s["seed"] = seed;
  s["episodes_run"] = result.train_log.size();
  s["train_successes"] = result.train_successes;
  s["test_successes"] = result.test_successes;
  s["first_train_success"] = result.first_train_success;
  s["first_test_success"] = result.first_test_success;
  s["final_threshold"] = result.final_threshold;
  double min_cost = std::numeric_limits<double>::infinity();
  for (const auto& r : result.train_log) min_cost = std::min(min_cost, r.min_cost);
  for (const auto& r : result.test_log) min_cost = std::min(min_cost, r.min_cost);
  s["min_cost"] = result.train_log.empty() && result.test_log.empty() ? 0.0 : min_cost;
  if (result.best.found) {
    s["best"] = {{"cost", result.best.cost},
                 {"episode", result.best.episode},
                 {"from_test_phase", result.best.from_test_phase},
                 {"gates", gates_to_json(result.best.gates)},
                 {"angles", result.best.angles},
                 {"exact_cost", result.best.exact_cost}};
  }
  fs::create_directories(dir);
  std::ofstream f(dir + "/summary.json");
  f << s.dump(2) << "\n";
}

// Runs fn(seed) for every seed on a small worker pool; rethrows the first
// failure after the pool drains.
void for_each_seed(const std::vector<std::uint64_t>& seeds,
                   const std::function<void(std::uint64_t)>& fn) {
  const int workers = worker_count(seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      try {
        fn(seeds[i]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

qas::RunConfig make_run_config(const qas::ExperimentConfig& cfg, std::uint64_t seed,
                               const std::string& out_dir) {
  qas::RunConfig rc;
  rc.episodes = cfg.episodes;
  rc.seed = seed;
  rc.agent = cfg.agent;
  rc.env = cfg.env;
  rc.curriculum = cfg.curriculum;
  rc.out_dir = out_dir;
  return rc;
}

int run_training_task(const qas::ExperimentConfig& cfg, bool resume, bool quiet) {
  for_each_seed(cfg.seeds, [&](std::uint64_t seed) {
    const qas::VariationalProblem problem = qas::build_problem(cfg);
    const std::string dir = seed_dir(cfg.output_dir, seed);
    qas::RunConfig rc = make_run_config(cfg, seed, dir);
    qas::RunResult result;
    if (cfg.task == qas::TaskKind::RandomSearch) {
      result = qas::random_search_baseline(problem, rc);
    } else if (resume) {
      result = qas::resume_experiment(problem, rc, qas::checkpoint_path(dir));
    } else {
      result = qas::run_experiment(problem, rc);
    }
    write_summary(dir, seed, problem, result);
    if (!quiet) {
      static std::mutex log_mutex;
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cerr << "seed " << seed << ": episodes=" << result.train_log.size()
                << " train_successes=" << result.train_successes
                << " test_successes=" << result.test_successes << "\n";
    }
  });
  return 0;
}

int run_certify_task(const qas::ExperimentConfig& cfg, bool quiet) {
  for_each_seed(cfg.seeds, [&](std::uint64_t seed) {
    const qas::Channel ideal = qas::build_channel(cfg.certify.ideal);
    const qas::Channel candidate = qas::build_channel(cfg.certify.candidate);
    const int m = cfg.certify.m > 0 ? cfg.certify.m : (1 << (2 * ideal.n));
    const qas::VqsdEngine engine = qas::lhea_vqsd_engine(
        cfg.certify.layers, cfg.certify.entangler, cfg.optimizer, cfg.certify.vqsd_threshold);
    std::mt19937_64 rng(seed);
    const qas::NoiseSpec* noise = cfg.noise ? &*cfg.noise : nullptr;
    const qas::CertifyReport report = qas::certify(ideal, candidate, engine, m, rng, noise);
    const std::string dir = seed_dir(cfg.output_dir, seed);
    fs::create_directories(dir);
    std::ofstream f(dir + "/certify_report.json");
    f << report.to_json() << "\n";
    if (!quiet) {
      std::cerr << "seed " << seed << ": F=" << report.exact_fidelity
                << " TFB=[" << report.bounds_per_m.back().lower << ", "
                << report.bounds_per_m.back().upper << "]\n";
    }
  });
  return 0;
}

int run_bench_lhea_task(const qas::ExperimentConfig& cfg, bool quiet) {
  for_each_seed(cfg.seeds, [&](std::uint64_t seed) {
    const qas::VariationalProblem problem = qas::build_problem(cfg);
    const int n = std::holds_alternative<qas::VqsdProblem>(problem)
                      ? std::get<qas::VqsdProblem>(problem).target.num_qubits()
                      : std::get<qas::VqeProblem>(problem).hamiltonian->num_qubits();
    const std::string dir = seed_dir(cfg.output_dir, seed);
    fs::create_directories(dir);
    std::ofstream f(dir + "/lhea_log.csv");
    f << "layers,parameters,gates,best_cost,fevals\n";
    std::mt19937_64 rng(seed);
    for (int layers = 1; layers <= cfg.bench.max_layers; ++layers) {
      qas::LheaSpec spec;
      spec.layers = layers;
      spec.flavor = cfg.bench.flavor;
      const qas::Circuit ansatz = qas::build_lhea(n, spec);
      const qas::OptimResult r = qas::optimize_angles(
          problem, ansatz, cfg.optimizer, rng, cfg.noise ? &*cfg.noise : nullptr);
      char line[160];
      std::snprintf(line, sizeof line, "%d,%d,%d,%.17g,%d\n", layers, ansatz.parameter_count(),
                    ansatz.gate_count(), r.best_value, r.fevals_used);
      f << line;
      if (!quiet) {
        std::cerr << "seed " << seed << " layers " << layers << ": cost=" << r.best_value << "\n";
      }
    }
  });
  return 0;
}

struct PanelStats {
  double min_error = std::numeric_limits<double>::quiet_NaN();
  long first_success = -1;
  int min_depth = -1;
  int min_gate_count = -1;
};

PanelStats panel_from_csv(const std::string& path) {
  PanelStats stats;
  std::ifstream f(path);
  if (!f) return stats;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    std::istringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (cols.size() < 12) continue;
    const long episode = std::stol(cols[0]);
    const bool success = cols[2] == "1";
    const double min_cost = std::stod(cols[4]);
    const int gates = std::stoi(cols[5]);
    const int depth = std::stoi(cols[8]);
    if (std::isnan(stats.min_error) || min_cost < stats.min_error) stats.min_error = min_cost;
    if (success) {
      if (stats.first_success < 0) stats.first_success = episode;
      if (stats.min_depth < 0 || depth < stats.min_depth) stats.min_depth = depth;
      if (stats.min_gate_count < 0 || gates < stats.min_gate_count) {
        stats.min_gate_count = gates;
      }
    }
  }
  return stats;
}

int run_report(const std::string& dir, bool quiet) {
  json seeds = json::array();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("seed_", 0) != 0) continue;
    json per_seed;
    per_seed["seed_dir"] = name;
    for (const char* log : {"train_log.csv", "test_log.csv"}) {
      const std::string path = entry.path().string() + "/" + log;
      if (!fs::exists(path)) continue;
      const PanelStats s = panel_from_csv(path);
      json panel;
      panel["min_error"] = s.min_error;
      panel["first_successful_episode"] = s.first_success;
      panel["min_depth"] = s.min_depth;
      panel["min_gate_count"] = s.min_gate_count;
      per_seed[log] = panel;
    }
    seeds.push_back(per_seed);
  }
  if (seeds.empty()) {
    std::cerr << "report: no seed_* directories under " << dir << "\n";
    return 2;
  }
  json report;
  report["runs"] = seeds;
  std::ofstream f(dir + "/report.json");
  f << report.dump(2) << "\n";
  if (!quiet) {
    std::cout << "seed_dir              log            min_error     1st_succ  min_depth  min_gates\n";
    for (const auto& s : seeds) {
      for (const char* log : {"train_log.csv", "test_log.csv"}) {
        if (!s.contains(log)) continue;
        const auto& p = s.at(log);
        std::printf("%-20s  %-13s  %-12.3e  %8ld  %9d  %9d\n",
                    s.at("seed_dir").get<std::string>().c_str(), log,
                    p.at("min_error").get<double>(), p.at("first_successful_episode").get<long>(),
                    p.at("min_depth").get<int>(), p.at("min_gate_count").get<int>());
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reinforcement-learning quantum architecture search runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::int64_t seed_override = -1;
  bool quiet = false;
  std::string report_dir;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config) {
      cmd->add_option("--config", config_path, "experiment config file")->required();
      cmd->add_option("--seed-override", seed_override, "run only this seed");
      cmd->add_option("--out", out_override, "output directory override");
    }
    cmd->add_flag("--quiet", quiet, "suppress progress output");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "execute the experiment across seeds");
  add_common(cmd_run, true);
  CLI::App* cmd_resume = app.add_subcommand("resume", "continue from per-seed checkpoints");
  add_common(cmd_resume, true);
  CLI::App* cmd_validate = app.add_subcommand("validate-config", "check a config without running");
  add_common(cmd_validate, true);
  CLI::App* cmd_report = app.add_subcommand("report", "aggregate episode logs into a summary");
  cmd_report->add_option("--out", report_dir, "run output directory")->required();
  add_common(cmd_report, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_report->parsed()) {
      return run_report(report_dir, quiet);
    }

    qas::ExperimentConfig cfg;
    try {
      cfg = qas::load_config(config_path);
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return 1;
    }
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};

    if (cmd_validate->parsed()) {
      if (!quiet) std::cerr << "config ok: task=" << qas::task_name(cfg.task) << "\n";
      return 0;
    }

    const std::string started = iso_timestamp();
    write_manifest(cfg.output_dir, cfg, started, "");
    int rc = 0;
    switch (cfg.task) {
      case qas::TaskKind::Vqsd:
      case qas::TaskKind::Vqe:
      case qas::TaskKind::RandomSearch:
        rc = run_training_task(cfg, cmd_resume->parsed(), quiet);
        break;
      case qas::TaskKind::Certify:
        rc = run_certify_task(cfg, quiet);
        break;
      case qas::TaskKind::BenchLhea:
        rc = run_bench_lhea_task(cfg, quiet);
        break;
    }
    write_manifest(cfg.output_dir, cfg, started, iso_timestamp());
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
}
