#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>

#include "abc/factory_floor.hpp"
#include "abc/rng.hpp"

namespace abc {

enum class PolicyKind { Heuristic, Mcts, ClonedModel, FixedTable };

constexpr std::string_view kind_name(PolicyKind k) noexcept {
  switch (k) {
    case PolicyKind::Heuristic: return "heuristic";
    case PolicyKind::Mcts: return "mcts";
    case PolicyKind::ClonedModel: return "cloned-model";
    case PolicyKind::FixedTable: return "fixed-table";
  }
  return "?";
}

/// Individual decision rule for one robot. Implementations are immutable and
/// the chosen action is a function of (state, agent, rng state) only.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual PolicyKind kind() const noexcept = 0;
  virtual Action act(const GridState& state, std::size_t agent, Rng& rng) const = 0;

  /// True when act() never touches the rng, so its results may be memoized.
  virtual bool deterministic() const noexcept { return true; }
};

using PolicyHandle = std::shared_ptr<const Policy>;

/// Time-indexed lookup table; states missing from the table fall back to
/// `fallback` (ACT by default).
class FixedTablePolicy final : public Policy {
 public:
  using Table = std::unordered_map<GridState, Action, GridStateHash>;

  explicit FixedTablePolicy(Table table, Action fallback = Action::Act)
      : table_(std::move(table)), fallback_(fallback) {}

  PolicyKind kind() const noexcept override { return PolicyKind::FixedTable; }

  Action act(const GridState& state, std::size_t, Rng&) const override {
    auto it = table_.find(state);
    return it == table_.end() ? fallback_ : it->second;
  }

  const Table& table() const noexcept { return table_; }

 private:
  Table table_;
  Action fallback_;
};

}  // namespace abc
