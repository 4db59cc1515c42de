#pragma once

// Factory Floor spatial task allocation domain: robots on a grid clean up
// task piles. Shared reward is the number of tasks removed per step.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "abc/errors.hpp"
#include "abc/rng.hpp"

namespace abc {

enum class Action : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3, Act = 4 };

inline constexpr std::size_t kNumActions = 5;
inline constexpr std::array<Action, kNumActions> kAllActions{Action::Up, Action::Down, Action::Left,
                                                             Action::Right, Action::Act};

constexpr std::size_t index_of(Action a) noexcept { return static_cast<std::size_t>(a); }

inline Action action_from_index(std::size_t i) {
  if (i >= kNumActions) throw ArgumentError("action index out of range: " + std::to_string(i));
  return static_cast<Action>(i);
}

constexpr std::string_view action_name(Action a) noexcept {
  switch (a) {
    case Action::Up: return "UP";
    case Action::Down: return "DOWN";
    case Action::Left: return "LEFT";
    case Action::Right: return "RIGHT";
    case Action::Act: return "ACT";
  }
  return "?";
}

struct Cell {
  int row = 0;
  int col = 0;

  friend constexpr bool operator==(const Cell&, const Cell&) = default;
  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

constexpr int manhattan(Cell a, Cell b) noexcept {
  return (a.row > b.row ? a.row - b.row : b.row - a.row) +
         (a.col > b.col ? a.col - b.col : b.col - a.col);
}

struct TaskPile {
  Cell cell;
  int count = 0;
};

/// Optional experiment defaults carried in a config's [run] section.
struct RunDefaults {
  std::optional<double> exploration;
  std::optional<std::size_t> episodes;
  std::optional<std::size_t> generations;
  std::optional<std::size_t> uct_iters;
  std::optional<std::size_t> sparse_limit;
  std::optional<double> diy_bonus;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;
  std::optional<bool> include_history;

  bool empty() const noexcept {
    return !(exploration || episodes || generations || uct_iters || sparse_limit || diy_bonus || seed ||
             batch_size || epochs || learning_rate || include_history);
  }
};

struct DomainSpec {
  int width = 0;
  int height = 0;
  int horizon = 1;
  double move_success = 1.0;
  double act_success = 1.0;
  double discount = 1.0;
  std::vector<int> robot_ids;     // ascending; agent index i <-> robot_ids[i]
  std::vector<Cell> robot_starts;
  std::vector<TaskPile> fixed_tasks;
  std::vector<Cell> spawn_cells;
  int spawn_events_per_step = 0;
  double spawn_probability = 0.0;
  RunDefaults run;

  std::size_t n_agents() const noexcept { return robot_starts.size(); }
  std::size_t n_cells() const noexcept { return static_cast<std::size_t>(width * height); }
  bool in_bounds(Cell c) const noexcept {
    return c.row >= 0 && c.row < height && c.col >= 0 && c.col < width;
  }
  std::size_t cell_index(Cell c) const noexcept {
    return static_cast<std::size_t>(c.row * width + c.col);
  }
  Cell cell_at(std::size_t idx) const noexcept {
    return {static_cast<int>(idx) / width, static_cast<int>(idx) % width};
  }
};

/// Full world state. Robots and tasks may share cells.
struct GridState {
  std::vector<int> tasks;  // row-major, height x width
  std::vector<Cell> robots;
  int time = 0;

  friend bool operator==(const GridState&, const GridState&) = default;

  int total_tasks() const noexcept {
    int s = 0;
    for (int t : tasks) s += t;
    return s;
  }
};

struct GridStateHash {
  std::size_t operator()(const GridState& s) const noexcept {
    std::uint64_t h = mix64(static_cast<std::uint64_t>(s.time));
    for (int t : s.tasks) h = mix64(h ^ static_cast<std::uint64_t>(t));
    for (const auto& c : s.robots)
      h = mix64(h ^ (static_cast<std::uint64_t>(c.row) << 32 | static_cast<std::uint32_t>(c.col)));
    return static_cast<std::size_t>(h);
  }
};

inline void validate(const DomainSpec& spec) {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0,1]");
  };
  if (spec.width < 1 || spec.height < 1) throw ConfigError("grid dimensions must be positive");
  if (spec.horizon < 1) throw ConfigError("horizon must be >= 1");
  prob(spec.move_success, "move_success");
  prob(spec.act_success, "act_success");
  prob(spec.discount, "discount");
  prob(spec.spawn_probability, "spawn probability");
  if (spec.robot_starts.empty()) throw ConfigError("at least one robot is required");
  if (spec.robot_ids.size() != spec.robot_starts.size())
    throw ConfigError("robot id list does not match robot start list");
  for (std::size_t i = 1; i < spec.robot_ids.size(); ++i)
    if (spec.robot_ids[i] <= spec.robot_ids[i - 1])
      throw ConfigError("robot ids must be unique and ascending");
  for (auto c : spec.robot_starts)
    if (!spec.in_bounds(c)) throw ConfigError("robot start out of bounds");
  for (const auto& t : spec.fixed_tasks) {
    if (!spec.in_bounds(t.cell)) throw ConfigError("task cell out of bounds");
    if (t.count < 0) throw ConfigError("task count must be non-negative");
  }
  for (auto c : spec.spawn_cells)
    if (!spec.in_bounds(c)) throw ConfigError("spawn cell out of bounds");
  if (spec.spawn_events_per_step < 0) throw ConfigError("spawn events must be non-negative");
  if (spec.spawn_events_per_step > 0 && spec.spawn_cells.empty())
    throw ConfigError("spawn events configured without spawn cells");
}

inline GridState initial_state(const DomainSpec& spec) {
  GridState s;
  s.tasks.assign(spec.n_cells(), 0);
  for (const auto& t : spec.fixed_tasks) s.tasks[spec.cell_index(t.cell)] += t.count;
  s.robots = spec.robot_starts;
  s.time = 0;
  return s;
}

/// Per-robot result of the action phase of a transition.
struct StepOutcome {
  GridState next;
  double reward = 0.0;
  std::vector<int> removed_by;  // tasks removed by each robot this step
};

inline Cell moved(Cell c, Action a, const DomainSpec& spec) noexcept {
  Cell n = c;
  switch (a) {
    case Action::Up: --n.row; break;
    case Action::Down: ++n.row; break;
    case Action::Left: --n.col; break;
    case Action::Right: ++n.col; break;
    case Action::Act: break;
  }
  return spec.in_bounds(n) ? n : c;  // off-grid moves are no-ops
}

/// Robot phase with the per-robot success flags already drawn; ACT removals
/// are resolved in ascending robot order.
inline StepOutcome resolve_actions(const GridState& state, const std::vector<Action>& joint,
                                   const std::vector<bool>& ok, const DomainSpec& spec) {
  if (state.time >= spec.horizon) throw EpisodeOverError("episode already reached its horizon");
  if (joint.size() != state.robots.size() || ok.size() != joint.size())
    throw ArgumentError("joint action length does not match agent count");
  StepOutcome out;
  out.next = state;
  out.removed_by.assign(joint.size(), 0);
  for (std::size_t i = 0; i < joint.size(); ++i) {
    if (!ok[i]) continue;
    if (joint[i] == Action::Act) {
      int& pile = out.next.tasks[spec.cell_index(state.robots[i])];
      if (pile > 0) {
        --pile;
        out.removed_by[i] = 1;
        out.reward += 1.0;
      }
    } else {
      out.next.robots[i] = moved(state.robots[i], joint[i], spec);
    }
  }
  out.next.time = state.time + 1;
  return out;
}

/// Robot phase only: every robot draws one success variate, in agent order.
inline StepOutcome apply_actions(const GridState& state, const std::vector<Action>& joint,
                                 const DomainSpec& spec, Rng& rng) {
  if (state.time >= spec.horizon) throw EpisodeOverError("episode already reached its horizon");
  if (joint.size() != state.robots.size())
    throw ArgumentError("joint action length does not match agent count");
  std::vector<bool> ok(joint.size());
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const double p = joint[i] == Action::Act ? spec.act_success : spec.move_success;
    ok[i] = rng.uniform() < p;
  }
  return resolve_actions(state, joint, ok, spec);
}

/// Each of spec.spawn_events_per_step events adds one task, with the
/// configured probability, to a uniformly drawn spawn cell.
inline GridState spawn_tasks(GridState state, const DomainSpec& spec, Rng& rng) {
  for (int e = 0; e < spec.spawn_events_per_step; ++e) {
    if (!(rng.uniform() < spec.spawn_probability)) continue;
    const auto k = rng.below(spec.spawn_cells.size());
    ++state.tasks[spec.cell_index(spec.spawn_cells[k])];
  }
  return state;
}

/// Full transition: robot phase followed by spawning.
inline StepOutcome step(const GridState& state, const std::vector<Action>& joint,
                        const DomainSpec& spec, Rng& rng) {
  StepOutcome out = apply_actions(state, joint, spec, rng);
  if (spec.spawn_events_per_step > 0) out.next = spawn_tasks(std::move(out.next), spec, rng);
  return out;
}

/// Channel-major (n_agents + 2, height, width) tensor.
struct EncodedState {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t c, std::size_t r, std::size_t col) const {
    return values[(c * height + r) * width + col];
  }
  friend bool operator==(const EncodedState&, const EncodedState&) = default;
};

/// Channel 0: task counts. Channel 1: time / horizon everywhere.
/// Channel 1 + i (i = 1..n): one-hot position of robot i.
inline EncodedState encode_state(const GridState& state, const DomainSpec& spec) {
  EncodedState e;
  e.channels = state.robots.size() + 2;
  e.height = static_cast<std::size_t>(spec.height);
  e.width = static_cast<std::size_t>(spec.width);
  const std::size_t plane = e.height * e.width;
  e.values.assign(e.channels * plane, 0.0);
  for (std::size_t k = 0; k < plane; ++k) e.values[k] = static_cast<double>(state.tasks[k]);
  const double tnorm = static_cast<double>(state.time) / static_cast<double>(spec.horizon);
  std::fill(e.values.begin() + static_cast<std::ptrdiff_t>(plane),
            e.values.begin() + static_cast<std::ptrdiff_t>(2 * plane), tnorm);
  for (std::size_t i = 0; i < state.robots.size(); ++i)
    e.values[(2 + i) * plane + spec.cell_index(state.robots[i])] = 1.0;
  return e;
}

// ---------------------------------------------------------------------------
// Config text format

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

inline long long parse_int(std::string_view s, int line) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError(line, "expected integer, got '" + std::string(s) + "'");
  return v;
}

inline double parse_real(std::string_view s, int line) {
  // from_chars for double is not available on every toolchain we target
  std::string tmp(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tmp, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (tmp.empty() || used != tmp.size())
    throw ParseError(line, "expected number, got '" + tmp + "'");
  return v;
}

inline double parse_probability(std::string_view s, int line, const std::string& what) {
  const double p = parse_real(s, line);
  if (!(p >= 0.0 && p <= 1.0))
    throw ParseError(line, what + " must lie in [0,1], got " + std::string(s));
  return p;
}

}  // namespace detail

/// Parses the INI-style domain format with [grid], [robots], [tasks] and
/// [spawns] sections (plus an optional [run] section of experiment defaults).
inline DomainSpec parse_domain_config(std::istream& in) {
  using detail::parse_int;
  using detail::parse_real;
  using detail::split;
  using detail::trim;

  DomainSpec spec;
  std::string section;
  std::set<std::string> seen;
  std::map<std::string, std::string> grid_keys;
  std::map<std::string, int> grid_key_line;
  struct RobotLine {
    int id;
    Cell cell;
    int line;
  };
  struct CellLine {
    Cell cell;
    int line;
  };
  std::vector<RobotLine> robots;
  std::vector<std::pair<TaskPile, int>> tasks;
  std::vector<CellLine> spawns;
  bool have_events = false;
  int events_line = 0;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "grid" && section != "robots" && section != "tasks" && section != "spawns" &&
          section != "run")
        throw ParseError(line_no, "unknown section [" + section + "]");
      if (!seen.insert(section).second) throw ParseError(line_no, "duplicate section [" + section + "]");
      continue;
    }
    if (section.empty()) throw ParseError(line_no, "content before first section");

    if (section == "grid" || section == "run") {
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
      std::string key(trim(line.substr(0, eq)));
      std::string_view value = trim(line.substr(eq + 1));
      if (section == "run") {
        auto count = [&](std::optional<std::size_t>& dst) {
          auto v = parse_int(value, line_no);
          if (v < 0) throw ParseError(line_no, key + " must be non-negative");
          dst = static_cast<std::size_t>(v);
        };
        auto positive = [&](std::optional<double>& dst, bool allow_zero) {
          const double v = parse_real(value, line_no);
          if (!(v > 0.0 || (allow_zero && v == 0.0)))
            throw ParseError(line_no, key + (allow_zero ? " must be non-negative" : " must be positive"));
          dst = v;
        };
        RunDefaults& r = spec.run;
        if (key == "exploration") positive(r.exploration, false);
        else if (key == "episodes") count(r.episodes);
        else if (key == "generations") count(r.generations);
        else if (key == "uct_iters") count(r.uct_iters);
        else if (key == "sparse_limit") count(r.sparse_limit);
        else if (key == "diy_bonus") positive(r.diy_bonus, true);
        else if (key == "batch_size") count(r.batch_size);
        else if (key == "epochs") count(r.epochs);
        else if (key == "learning_rate") positive(r.learning_rate, false);
        else if (key == "seed") {
          std::optional<std::size_t> v;
          count(v);
          r.seed = *v;
        } else if (key == "include_history") {
          auto v = parse_int(value, line_no);
          if (v != 0 && v != 1) throw ParseError(line_no, "include_history must be 0 or 1");
          r.include_history = v == 1;
        } else {
          throw ParseError(line_no, "unknown key '" + key + "' in [run]");
        }
        continue;
      }
      static const std::set<std::string> known{"width", "height", "horizon", "move_success",
                                               "act_success", "discount"};
      if (!known.count(key)) throw ParseError(line_no, "unknown key '" + key + "' in [grid]");
      if (grid_keys.count(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
      grid_keys[key] = std::string(value);
      grid_key_line[key] = line_no;
    } else if (section == "robots") {
      auto f = split(line, ',');
      if (f.size() != 3) throw ParseError(line_no, "robot line must be id,row,col");
      auto id = parse_int(f[0], line_no);
      if (id <= 0) throw ParseError(line_no, "robot ids must be positive");
      for (const auto& r : robots)
        if (r.id == id) throw ParseError(line_no, "duplicate robot id " + std::to_string(id));
      robots.push_back({static_cast<int>(id),
                        {static_cast<int>(parse_int(f[1], line_no)), static_cast<int>(parse_int(f[2], line_no))},
                        line_no});
    } else if (section == "tasks") {
      auto f = split(line, ',');
      if (f.size() != 3) throw ParseError(line_no, "task line must be row,col,count");
      auto count = parse_int(f[2], line_no);
      if (count < 0) throw ParseError(line_no, "task count must be non-negative");
      tasks.push_back({{{static_cast<int>(parse_int(f[0], line_no)), static_cast<int>(parse_int(f[1], line_no))},
                        static_cast<int>(count)},
                       line_no});
    } else if (section == "spawns") {
      if (line.starts_with("events")) {
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected events=count,probability");
        auto f = split(trim(line.substr(eq + 1)), ',');
        if (f.size() != 2) throw ParseError(line_no, "expected events=count,probability");
        if (have_events) throw ParseError(line_no, "duplicate events line");
        auto ev = parse_int(f[0], line_no);
        if (ev < 0) throw ParseError(line_no, "spawn events must be non-negative");
        spec.spawn_events_per_step = static_cast<int>(ev);
        spec.spawn_probability = detail::parse_probability(f[1], line_no, "spawn probability");
        have_events = true;
        events_line = line_no;
      } else {
        auto f = split(line, ',');
        if (f.size() != 2) throw ParseError(line_no, "spawn cell line must be row,col");
        spawns.push_back({{static_cast<int>(parse_int(f[0], line_no)), static_cast<int>(parse_int(f[1], line_no))},
                          line_no});
      }
    }
  }
  const int eof_line = line_no + 1;

  for (const char* s : {"grid", "robots", "tasks", "spawns"})
    if (!seen.count(s)) throw ParseError(eof_line, std::string("missing section [") + s + "]");
  for (const char* k : {"width", "height", "horizon", "move_success", "act_success"})
    if (!grid_keys.count(k)) throw ParseError(eof_line, std::string("missing [grid] key '") + k + "'");

  auto int_key = [&](const std::string& k) {
    return static_cast<int>(parse_int(grid_keys[k], grid_key_line[k]));
  };
  spec.width = int_key("width");
  spec.height = int_key("height");
  spec.horizon = int_key("horizon");
  if (spec.width < 1) throw ParseError(grid_key_line["width"], "width must be positive");
  if (spec.height < 1) throw ParseError(grid_key_line["height"], "height must be positive");
  if (spec.horizon < 1) throw ParseError(grid_key_line["horizon"], "horizon must be >= 1");
  spec.move_success = detail::parse_probability(grid_keys["move_success"], grid_key_line["move_success"], "move_success");
  spec.act_success = detail::parse_probability(grid_keys["act_success"], grid_key_line["act_success"], "act_success");
  if (grid_keys.count("discount"))
    spec.discount = detail::parse_probability(grid_keys["discount"], grid_key_line["discount"], "discount");

  if (robots.empty()) throw ParseError(eof_line, "no robots defined");
  std::sort(robots.begin(), robots.end(), [](const RobotLine& a, const RobotLine& b) { return a.id < b.id; });
  for (const auto& r : robots) {
    if (!spec.in_bounds(r.cell)) throw ParseError(r.line, "robot position out of bounds");
    spec.robot_ids.push_back(r.id);
    spec.robot_starts.push_back(r.cell);
  }
  for (const auto& [t, ln] : tasks) {
    if (!spec.in_bounds(t.cell)) throw ParseError(ln, "task cell out of bounds");
    spec.fixed_tasks.push_back(t);
  }
  for (const auto& s : spawns) {
    if (!spec.in_bounds(s.cell)) throw ParseError(s.line, "spawn cell out of bounds");
    spec.spawn_cells.push_back(s.cell);
  }
  if (!have_events && !spawns.empty()) throw ParseError(spawns.front().line, "spawn cells without events line");
  if (spec.spawn_events_per_step > 0 && spec.spawn_cells.empty())
    throw ParseError(events_line, "spawn events configured without spawn cells");
  return spec;
}

inline DomainSpec parse_domain_config(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_domain_config(in);
}

/// Writes a spec back in the config format (round-trips through the parser).
inline std::string format_domain_config(const DomainSpec& spec) {
  std::ostringstream o;
  o.precision(17);
  o << "[grid]\nwidth=" << spec.width << "\nheight=" << spec.height << "\nhorizon=" << spec.horizon
    << "\nmove_success=" << spec.move_success << "\nact_success=" << spec.act_success
    << "\ndiscount=" << spec.discount << "\n[robots]\n";
  for (std::size_t i = 0; i < spec.n_agents(); ++i)
    o << spec.robot_ids[i] << ',' << spec.robot_starts[i].row << ',' << spec.robot_starts[i].col << '\n';
  o << "[tasks]\n";
  for (const auto& t : spec.fixed_tasks) o << t.cell.row << ',' << t.cell.col << ',' << t.count << '\n';
  o << "[spawns]\nevents=" << spec.spawn_events_per_step << ',' << spec.spawn_probability << '\n';
  for (auto c : spec.spawn_cells) o << c.row << ',' << c.col << '\n';
  if (const RunDefaults& r = spec.run; !r.empty()) {
    o << "[run]\n";
    auto put = [&o](const char* key, const auto& v) {
      if (v) o << key << '=' << *v << '\n';
    };
    put("generations", r.generations);
    put("episodes", r.episodes);
    put("uct_iters", r.uct_iters);
    put("exploration", r.exploration);
    put("sparse_limit", r.sparse_limit);
    put("diy_bonus", r.diy_bonus);
    put("seed", r.seed);
    put("batch_size", r.batch_size);
    put("epochs", r.epochs);
    put("learning_rate", r.learning_rate);
    if (r.include_history) o << "include_history=" << (*r.include_history ? 1 : 0) << '\n';
  }
  return o.str();
}

}  // namespace abc
