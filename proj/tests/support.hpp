#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "abc/factory_floor.hpp"

namespace abc::testing {

inline DomainSpec make_spec(int width, int height, int horizon, std::vector<Cell> robots,
                            std::vector<TaskPile> tasks = {}, double move_success = 1.0) {
  DomainSpec s;
  s.width = width;
  s.height = height;
  s.horizon = horizon;
  s.move_success = move_success;
  for (std::size_t i = 0; i < robots.size(); ++i) s.robot_ids.push_back(static_cast<int>(i) + 1);
  s.robot_starts = std::move(robots);
  s.fixed_tasks = std::move(tasks);
  validate(s);
  return s;
}

/// One of the configs shipped in configs/.
inline DomainSpec load_shipped(const std::string& name) {
  std::ifstream in(std::string(ABC_CONFIG_DIR) + "/" + name);
  if (!in) throw ConfigError("missing shipped config " + name);
  return parse_domain_config(in);
}

}  // namespace abc::testing
