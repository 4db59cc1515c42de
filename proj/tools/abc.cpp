// abc <run|oracle|summarize> [flags]
//
// Exit status: 0 success, 1 configuration or usage error, 2 runtime failure.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "abc/pipeline.hpp"
#include "abc/verification.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct RunArgs {
  std::string config;
  std::optional<std::size_t> generations, episodes, uct_iters, sparse_limit, threads, batch_size, epochs;
  std::optional<double> exploration, diy_bonus, learning_rate;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool fast = false;
  bool include_history = false;
};

struct OracleArgs {
  std::string suite = "all";
  std::uint64_t seed = 7;
};

struct SummarizeArgs {
  std::string results;
};

abc::DomainSpec load_config(const std::string& path) {
  if (!fs::is_regular_file(path)) throw abc::ConfigError("config file not found: " + path);
  std::ifstream in(path);
  if (!in) throw abc::ConfigError("cannot read config file: " + path);
  try {
    return abc::parse_domain_config(in);
  } catch (const abc::ParseError& e) {
    throw abc::ConfigError(path + ":" + std::to_string(e.line()) + ": " + e.what());
  }
}

fs::path results_root() {
  if (const char* env = std::getenv("ABC_RESULTS_DIR"); env && *env) return env;
  return "results";
}

template <class T>
T pick(const std::optional<T>& flag, const std::optional<T>& config, T fallback) {
  return flag ? *flag : config ? *config : fallback;
}

int run(const RunArgs& a) {
  abc::DomainSpec spec = load_config(a.config);
  abc::validate(spec);
  const abc::RunDefaults& d = spec.run;

  // Precedence: explicit flag, then --fast, then the config's [run] section, then defaults.
  abc::MctsParams params;
  std::optional<std::size_t> fast_iters, fast_episodes;
  if (a.fast) {
    fast_iters = 2000;
    fast_episodes = 50;
  }
  params.iterations = a.uct_iters ? *a.uct_iters : fast_iters ? *fast_iters : pick(d.uct_iters, {}, std::size_t{20000});
  params.exploration = pick(a.exploration, d.exploration, 0.5);
  params.sparse_limit = pick(a.sparse_limit, d.sparse_limit, std::size_t{20});
  params.diy_bonus = pick(a.diy_bonus, d.diy_bonus, 0.7);
  const std::size_t episodes =
      a.episodes ? *a.episodes : fast_episodes ? *fast_episodes : pick(d.episodes, {}, std::size_t{320});
  const std::size_t generations = pick(a.generations, d.generations, std::size_t{5});
  const std::uint64_t seed = pick(a.seed, d.seed, std::uint64_t{42});
  abc::TrainingHyperparams hp;
  hp.batch_size = pick(a.batch_size, d.batch_size, hp.batch_size);
  hp.epochs = pick(a.epochs, d.epochs, hp.epochs);
  hp.learning_rate = pick(a.learning_rate, d.learning_rate, hp.learning_rate);
  hp.shuffle_seed = seed;
  const bool include_history = a.include_history || d.include_history.value_or(false);
  abc::validate(params);
  if (episodes == 0) throw abc::ConfigError("--episodes must be at least 1");
  if (hp.batch_size == 0) throw abc::ConfigError("--batch-size must be at least 1");

  const fs::path out = a.out ? fs::path(*a.out)
                             : results_root() / (fs::path(a.config).stem().string() + "_seed" + std::to_string(seed));

  abc::DomainSpec resolved = spec;
  resolved.run = {params.exploration, episodes,      generations, params.iterations,
                  params.sparse_limit, params.diy_bonus, seed,  hp.batch_size,
                  hp.epochs,          hp.learning_rate, include_history};
  abc::write_file_atomic(out / "config_resolved.ini",
                         [&](std::ostream& o) { o << abc::format_domain_config(resolved); });

  abc::PipelineOptions opt;
  opt.threads = a.threads.value_or(0);
  opt.include_history = include_history;
  opt.out_dir = out;
  opt.on_generation = [](const abc::GenerationRecord& r) {
    std::cerr << "generation " << r.generation << ": mean " << std::fixed << std::setprecision(3) << r.summary.mean
              << " [" << r.summary.ci95_low << ", " << r.summary.ci95_high << "]\n";
  };
  std::cerr << "running " << generations << " generations x " << episodes << " episodes, " << params.iterations
            << " UCT iterations, seed " << seed << " -> " << out.string() << '\n';
  abc::run_pipeline(spec, generations, episodes, params, hp, seed, opt);
  return kOk;
}

int oracle(const OracleArgs& a) {
  bool ok = true;
  for (const auto& r : abc::verify::run_suites(a.suite, a.seed)) {
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.cases - r.failures << "/" << r.cases
              << " cases";
    if (!r.detail.empty()) std::cerr << ", " << r.detail;
    std::cerr << " (" << std::fixed << std::setprecision(1) << r.seconds << " s)\n";
    ok = ok && r.passed;
  }
  return ok ? kOk : kRuntimeError;
}

/// Recomputes summary.csv and plot_data.csv from the per-generation episode
/// totals of a results directory and prints the table.
int summarize(const SummarizeArgs& a) {
  const fs::path dir = a.results;
  if (!fs::is_directory(dir)) throw abc::ConfigError("results directory not found: " + a.results);
  const abc::DomainSpec spec = load_config((dir / "config_resolved.ini").string());

  std::map<int, std::vector<double>> totals;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (!entry.is_directory() || !name.starts_with("gen")) continue;
    const fs::path file = entry.path() / "episode_totals.csv";
    if (!fs::is_regular_file(file)) continue;
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
      if (f.size() != 4) throw std::runtime_error("malformed row in " + file.string());
      double v = 0.0;
      std::from_chars(f[3].data(), f[3].data() + f[3].size(), v);
      totals[std::stoi(f[0])].push_back(v);
    }
  }
  if (totals.empty()) throw abc::ConfigError("no episode_totals.csv files under " + a.results);

  std::vector<abc::GenerationRecord> records;
  for (const auto& [g, xs] : totals) {
    abc::GenerationRecord r;
    r.generation = g;
    if (g >= 1) r.updated_agent = abc::next_update_agent(static_cast<std::size_t>(g), spec.n_agents());
    r.summary = abc::summarize_returns(xs);
    records.push_back(std::move(r));
  }
  abc::write_results(records, dir);
  std::cout << "generation  updated  episodes      mean        sd   ci95_low  ci95_high\n";
  for (const auto& r : records) {
    std::cout << std::setw(10) << r.generation << std::setw(9)
              << (r.updated_agent ? std::to_string(*r.updated_agent) : "-") << std::setw(10)
              << r.summary.n_episodes << std::fixed << std::setprecision(4) << std::setw(10) << r.summary.mean
              << std::setw(10) << r.summary.sample_sd << std::setw(11) << r.summary.ci95_low << std::setw(11)
              << r.summary.ci95_high << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alternating maximization with behavioral cloning"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run the generation loop and write results");
  run_cmd->add_option("--config", ra.config, "Domain config (.ini)")->required();
  run_cmd->add_option("--generations", ra.generations, "Number of updated generations");
  run_cmd->add_option("--episodes", ra.episodes, "Episodes simulated per generation");
  run_cmd->add_option("--uct-iters", ra.uct_iters, "UCT iterations per decision");
  run_cmd->add_option("--exploration", ra.exploration, "UCT exploration constant C");
  run_cmd->add_option("--sparse-limit", ra.sparse_limit, "Distinct child states per action node");
  run_cmd->add_option("--diy-bonus", ra.diy_bonus, "Bonus for the planner's own task removals");
  run_cmd->add_option("--seed", ra.seed, "Master seed");
  run_cmd->add_option("--out", ra.out, "Output directory");
  run_cmd->add_option("--threads", ra.threads, "Worker threads (0 = all cores)");
  run_cmd->add_option("--batch-size", ra.batch_size, "Cloning mini-batch size");
  run_cmd->add_option("--epochs", ra.epochs, "Cloning epochs");
  run_cmd->add_option("--learning-rate", ra.learning_rate, "Adam learning rate");
  run_cmd->add_flag("--include-history", ra.include_history, "Train on all past generations' data");
  run_cmd->add_flag("--fast", ra.fast, "Desk-scale preset: 2000 UCT iterations, 50 episodes");

  OracleArgs oa;
  auto* oracle_cmd = app.add_subcommand("oracle", "Run the exact-solver and gradient oracle suites");
  oracle_cmd->add_option("--suite", oa.suite, "lemma1, corollary1, mcts, gradient or all")
      ->check(CLI::IsMember({"all", "lemma1", "corollary1", "mcts", "gradient"}));
  oracle_cmd->add_option("--seed", oa.seed, "Seed of the random instances");

  SummarizeArgs sa;
  auto* sum_cmd = app.add_subcommand("summarize", "Recompute summary.csv from a results directory");
  sum_cmd->add_option("--results", sa.results, "Results directory of a run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return kConfigError;
  }

  try {
    if (*run_cmd) return run(ra);
    if (*oracle_cmd) return oracle(oa);
    return summarize(sa);
  } catch (const abc::ConfigError& e) {
    std::cerr << "abc: " << e.what() << '\n';
    return kConfigError;
  } catch (const abc::ArgumentError& e) {
    std::cerr << "abc: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "abc: " << e.what() << '\n';
    return kRuntimeError;
  }
}
