#pragma once

// Behavioral cloning: logged (state, action) pairs of one agent become a
// supervised dataset, and a policy network is fit to it with cross-entropy.

#include <charconv>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "abc/episode.hpp"
#include "abc/errors.hpp"
#include "abc/factory_floor.hpp"
#include "abc/nn.hpp"
#include "abc/policy.hpp"

namespace abc {

struct CloningRecord {
  nn::Sample sample;  // encoded pre-action state + executed action index
  std::uint32_t episode = 0;
  std::uint32_t step = 0;
};

struct CloningDataset {
  std::size_t agent = 0;
  int generation = 0;
  std::size_t channels = 0, height = 0, width = 0;
  std::vector<CloningRecord> records;
  std::size_t source_episode_count = 0;

  std::size_t size() const noexcept { return records.size(); }
};

struct TrainingHyperparams {
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  double learning_rate = 1e-3;
  std::uint64_t shuffle_seed = 0;
};

/// One record per (trajectory, step), in collection order.
inline CloningDataset build_dataset(std::span<const Trajectory> trajectories, std::size_t agent,
                                    const DomainSpec& spec, int generation) {
  if (trajectories.empty()) throw ArgumentError("build_dataset: no trajectories");
  if (agent >= spec.n_agents()) throw ArgumentError("build_dataset: agent index out of range");
  CloningDataset d;
  d.agent = agent;
  d.generation = generation;
  d.channels = spec.n_agents() + 2;
  d.height = static_cast<std::size_t>(spec.height);
  d.width = static_cast<std::size_t>(spec.width);
  d.source_episode_count = trajectories.size();
  for (std::size_t e = 0; e < trajectories.size(); ++e) {
    const auto& steps = trajectories[e].steps;
    for (std::size_t t = 0; t < steps.size(); ++t) {
      EncodedState enc = encode_state(steps[t].state, spec);
      d.records.push_back({{std::move(enc.values), index_of(steps[t].joint.at(agent))},
                           static_cast<std::uint32_t>(e),
                           static_cast<std::uint32_t>(t)});
    }
  }
  return d;
}

/// Concatenates datasets of the same agent (used to train on past generations too).
inline CloningDataset concat(std::span<const CloningDataset> parts) {
  if (parts.empty()) throw ArgumentError("concat: no datasets");
  CloningDataset out = parts.back();
  out.records.clear();
  out.source_episode_count = 0;
  for (const auto& p : parts) {
    if (p.channels != out.channels || p.height != out.height || p.width != out.width)
      throw ArgumentError("concat: dataset shapes differ");
    out.records.insert(out.records.end(), p.records.begin(), p.records.end());
    out.source_episode_count += p.source_episode_count;
  }
  return out;
}

/// Fits a freshly initialized network: `epochs` passes over the dataset,
/// reshuffled each epoch, in mini-batches of `batch_size` (last one may be short).
inline nn::PolicyModel train_model(const CloningDataset& data, const nn::NetworkArch& arch,
                                   const TrainingHyperparams& hp, std::uint64_t seed) {
  if (data.records.empty()) throw ArgumentError("train_model: empty dataset");
  if (hp.batch_size < 1) throw ArgumentError("train_model: batch size must be >= 1");
  if (data.channels != arch.input_channels || data.height != arch.height || data.width != arch.width)
    throw ArgumentError("train_model: dataset shape does not match network architecture");
  nn::PolicyModel model = nn::init_weights(arch, seed);
  model.meta.generation = static_cast<std::uint32_t>(data.generation);
  model.meta.agent_id = static_cast<std::uint32_t>(data.agent + 1);
  nn::AdamState opt = nn::AdamState::for_model(model, hp.learning_rate);

  std::vector<std::size_t> order(data.records.size());
  std::vector<const nn::Sample*> batch;
  batch.reserve(hp.batch_size);
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(hp.shuffle_seed, {seed, epoch}));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      batch.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + hp.batch_size); ++k)
        batch.push_back(&data.records[order[k]].sample);
      nn::training_step(model, opt, batch);
    }
  }
  return model;
}

/// Fraction of records whose label is the model's argmax action.
inline double training_accuracy(const nn::PolicyModel& model, const CloningDataset& data) {
  if (data.records.empty()) return 0.0;
  std::size_t hits = 0;
  nn::Activations act;
  for (const auto& r : data.records) {
    nn::forward(model, r.sample.input, act);
    hits += nn::argmax(act.probs) == r.sample.label;
  }
  return static_cast<double>(hits) / static_cast<double>(data.records.size());
}

inline Action cloned_policy_action(const nn::PolicyModel& model, const GridState& state, const DomainSpec& spec) {
  if (static_cast<int>(model.arch.height) != spec.height || static_cast<int>(model.arch.width) != spec.width ||
      model.arch.input_channels != state.robots.size() + 2)
    throw ArgumentError("cloned_policy_action: grid does not match the model's architecture");
  thread_local nn::Activations act;
  const EncodedState enc = encode_state(state, spec);
  nn::forward(model, enc.values, act);
  return action_from_index(nn::argmax(act.probs));
}

/// Teammate model backed by a trained network (argmax of the softmax output).
class ClonedPolicy final : public Policy {
 public:
  ClonedPolicy(nn::PolicyModel model, DomainSpec spec) : model_(std::move(model)), spec_(std::move(spec)) {
    cloned_policy_action(model_, initial_state(spec_), spec_);  // shape check
  }

  PolicyKind kind() const noexcept override { return PolicyKind::ClonedModel; }
  Action act(const GridState& state, std::size_t, Rng&) const override {
    return cloned_policy_action(model_, state, spec_);
  }

  const nn::PolicyModel& model() const noexcept { return model_; }

 private:
  nn::PolicyModel model_;
  DomainSpec spec_;
};

inline PolicyHandle make_cloned_policy(nn::PolicyModel model, const DomainSpec& spec) {
  return std::make_shared<ClonedPolicy>(std::move(model), spec);
}

namespace detail {

inline void write_real(std::ostream& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, end - buf);
}

}  // namespace detail

/// CSV: generation,agent,episode,step,action,v0..vK (flattened channel-major state).
inline void write_dataset_csv(std::ostream& out, const CloningDataset& d) {
  const std::size_t k = d.channels * d.height * d.width;
  out << "generation,agent,episode,step,action";
  for (std::size_t i = 0; i < k; ++i) out << ",v" << i;
  out << '\n';
  for (const auto& r : d.records) {
    out << d.generation << ',' << d.agent + 1 << ',' << r.episode << ',' << r.step << ',' << r.sample.label;
    for (double v : r.sample.input) {
      out << ',';
      detail::write_real(out, v);
    }
    out << '\n';
  }
}

}  // namespace abc
