#pragma once

// Generation loop: simulate the current joint MCTS policy, clone every
// agent's behavior, then let exactly one agent (round robin) swap its
// teammate and rollout models for the freshly cloned ones.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "abc/cloning.hpp"
#include "abc/episode.hpp"
#include "abc/heuristic.hpp"
#include "abc/nn.hpp"
#include "abc/planner.hpp"
#include "abc/results.hpp"

namespace abc {

/// MCTS configuration of one agent.
struct AgentConfig {
  std::vector<PolicyHandle> teammates;  // one slot per agent; own slot is null
  PolicyHandle rollout;
  MctsParams params;

  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;  // handle identity
};

struct PolicyRegistry {
  int generation = 0;
  std::vector<AgentConfig> agents;

  /// The joint MCTS policy this registry defines.
  std::vector<PolicyHandle> joint_policy(const DomainSpec& spec) const {
    std::vector<PolicyHandle> out;
    out.reserve(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i)
      out.push_back(std::make_shared<MctsPolicy>(spec, i, agents[i].teammates, agents[i].rollout, agents[i].params));
    return out;
  }
};

/// Generation-0 registry: heuristic teammate models and heuristic rollouts.
inline PolicyRegistry initial_registry(const DomainSpec& spec, const MctsParams& params) {
  PolicyRegistry r;
  const PolicyHandle h = make_heuristic_policy(spec);
  for (std::size_t i = 0; i < spec.n_agents(); ++i) {
    AgentConfig c{std::vector<PolicyHandle>(spec.n_agents(), h), h, params};
    c.teammates[i] = nullptr;
    r.agents.push_back(std::move(c));
  }
  return r;
}

/// 0-based indices of agents whose configuration differs between registries.
inline std::vector<std::size_t> changed_agents(const PolicyRegistry& a, const PolicyRegistry& b) {
  if (a.agents.size() != b.agents.size()) throw std::logic_error("registries have different agent counts");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < a.agents.size(); ++i)
    if (!(a.agents[i] == b.agents[i])) out.push_back(i);
  return out;
}

/// Agent updated at generation g >= 1: (g mod n) + 1, 1-based.
constexpr std::size_t next_update_agent(std::size_t g, std::size_t n) {
  if (g < 1 || n < 1) throw ArgumentError("next_update_agent requires g >= 1 and n >= 1");
  return g % n + 1;
}

struct PipelineOptions {
  std::size_t threads = 0;
  bool include_history = false;  // train on all past generations' data, not just the latest
  std::optional<std::filesystem::path> out_dir;
  std::function<void(const GenerationRecord&)> on_generation;  // progress hook
};

/// Seed of the episodes simulated for generation g.
constexpr std::uint64_t generation_seed(std::uint64_t master, int g) noexcept {
  return derive_seed(master, {0x47454eULL, static_cast<std::uint64_t>(g)});
}
constexpr std::uint64_t training_seed(std::uint64_t master, int g, std::size_t agent) noexcept {
  return derive_seed(master, {0x545241ULL, static_cast<std::uint64_t>(g), agent});
}

struct SimulatedGeneration {
  std::vector<Trajectory> episodes;
  GenerationRecord record;
};

/// Runs nSim episodes of the registry's joint policy and writes the episode
/// files of that generation.
inline SimulatedGeneration simulate_generation(const PolicyRegistry& registry, const DomainSpec& spec,
                                               std::size_t n_sim, std::uint64_t seed,
                                               const PipelineOptions& opt) {
  SimulatedGeneration out;
  const int g = registry.generation;
  out.episodes = run_episodes(spec, registry.joint_policy(spec), n_sim, generation_seed(seed, g), opt.threads);
  out.record.generation = g;
  if (g >= 1) out.record.updated_agent = next_update_agent(static_cast<std::size_t>(g), spec.n_agents());
  out.record.summary = summarize(out.episodes);
  if (opt.out_dir) {
    const auto dir = *opt.out_dir / ("gen" + std::to_string(g));
    write_file_atomic(dir / "episodes.csv", [&](std::ostream& o) { write_episodes_csv(o, g, out.episodes); });
    write_file_atomic(dir / "episode_totals.csv",
                      [&](std::ostream& o) { write_episode_totals_csv(o, g, out.episodes); });
  }
  return out;
}

struct GenerationResult {
  PolicyRegistry registry;   // generation g
  GenerationRecord record;   // summary of the generation g-1 episodes + trained artifacts
  std::vector<nn::PolicyModel> models;
  std::vector<CloningDataset> datasets;
};

/// One step of the loop: simulate with the generation g-1 registry, train one
/// model per agent on that data, and hand the new models to agent
/// next_update_agent(g, n) only.
inline GenerationResult run_generation(const PolicyRegistry& registry, int g, const DomainSpec& spec,
                                       std::size_t n_sim, const TrainingHyperparams& hp, std::uint64_t seed,
                                       const PipelineOptions& opt = {},
                                       std::vector<std::vector<CloningDataset>>* history = nullptr) {
  if (g < 1) throw ArgumentError("run_generation: g must be >= 1");
  if (registry.generation != g - 1) throw ArgumentError("run_generation: registry is not at generation g-1");
  const std::size_t n = spec.n_agents();
  SimulatedGeneration sim = simulate_generation(registry, spec, n_sim, seed, opt);
  if (history) history->resize(n);

  GenerationResult res;
  res.record = std::move(sim.record);
  res.datasets.resize(n);
  res.models.resize(n);
  const nn::NetworkArch arch = nn::arch_for(spec);
  parallel_for(n, opt.threads, [&](std::size_t i) {
    CloningDataset d = build_dataset(sim.episodes, i, spec, g - 1);
    CloningDataset train_on = d;
    if (opt.include_history && history) {
      std::vector<CloningDataset> parts = (*history)[i];
      parts.push_back(d);
      train_on = concat(parts);
    }
    TrainingHyperparams h = hp;
    h.shuffle_seed = derive_seed(hp.shuffle_seed, {static_cast<std::uint64_t>(g), i});
    res.models[i] = train_model(train_on, arch, h, training_seed(seed, g, i));
    res.datasets[i] = std::move(d);
  });
  if (history) {
    for (std::size_t i = 0; i < n; ++i) (*history)[i].push_back(res.datasets[i]);
  }

  if (opt.out_dir) {
    const auto dir = *opt.out_dir / ("gen" + std::to_string(g - 1));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ds = dir / ("dataset_agent" + std::to_string(i + 1) + ".csv");
      const auto mp = dir / ("model_agent" + std::to_string(i + 1) + ".abcnn");
      write_file_atomic(ds, [&](std::ostream& o) { write_dataset_csv(o, res.datasets[i]); });
      write_bytes(mp, nn::save_model(res.models[i]));
      res.record.dataset_paths.push_back(ds);
      res.record.model_paths.push_back(mp);
    }
  }

  std::vector<PolicyHandle> cloned;
  for (const auto& m : res.models) cloned.push_back(make_cloned_policy(m, spec));
  res.registry = registry;
  res.registry.generation = g;
  const std::size_t j = next_update_agent(static_cast<std::size_t>(g), n) - 1;
  for (std::size_t k = 0; k < n; ++k)
    res.registry.agents[j].teammates[k] = k == j ? nullptr : cloned[k];
  res.registry.agents[j].rollout = cloned[j];
  return res;
}

struct PipelineResult {
  std::vector<GenerationRecord> records;     // generations 0..nGen
  std::vector<PolicyRegistry> registries;    // registries 0..nGen
};

/// Baseline generation followed by n_gen updated generations. When
/// opt.out_dir is set, per-generation artifacts plus summary.csv and
/// plot_data.csv are written there.
inline PipelineResult run_pipeline(const DomainSpec& spec, std::size_t n_gen, std::size_t n_sim,
                                   const MctsParams& params, const TrainingHyperparams& hp, std::uint64_t seed,
                                   const PipelineOptions& opt = {}) {
  validate(spec);
  validate(params);
  if (n_sim == 0) throw ArgumentError("run_pipeline: episodes per generation must be >= 1");
  PipelineResult out;
  out.registries.push_back(initial_registry(spec, params));
  std::vector<std::vector<CloningDataset>> history;
  for (std::size_t g = 1; g <= n_gen; ++g) {
    GenerationResult r =
        run_generation(out.registries.back(), static_cast<int>(g), spec, n_sim, hp, seed, opt,
                       opt.include_history ? &history : nullptr);
    if (changed_agents(out.registries.back(), r.registry).size() != 1)
      throw std::logic_error("generation " + std::to_string(g) + " changed more than one agent");
    if (opt.on_generation) opt.on_generation(r.record);
    out.records.push_back(std::move(r.record));
    out.registries.push_back(std::move(r.registry));
  }
  SimulatedGeneration last = simulate_generation(out.registries.back(), spec, n_sim, seed, opt);
  if (opt.on_generation) opt.on_generation(last.record);
  out.records.push_back(std::move(last.record));
  if (opt.out_dir) write_results(out.records, *opt.out_dir);
  return out;
}

}  // namespace abc
