#pragma once

// Result files of a pipeline run. Every file is written to a temporary name
// and renamed into place, so a failed write never leaves a partial file.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "abc/episode.hpp"
#include "abc/stats.hpp"

namespace abc {

struct GenerationRecord {
  int generation = 0;
  std::optional<std::size_t> updated_agent;  // 1-based; none for generation 0
  ReturnSummary summary;
  std::vector<std::filesystem::path> model_paths;
  std::vector<std::filesystem::path> dataset_paths;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_real(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

/// Writes `path` through `fill`; on any failure the file is removed and an
/// IoError is thrown.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::function<void(std::ostream&)>& fill,
                              std::ios::openmode mode = std::ios::out) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  const fs::path tmp = path.string() + ".partial";
  {
    std::ofstream out(tmp, mode | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    try {
      fill(out);
      out.flush();
    } catch (...) {
      out.close();
      fs::remove(tmp, ec);
      throw;
    }
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError("write failed: " + path.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " into place");
  }
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  write_file_atomic(
      path,
      [&](std::ostream& o) { o.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())); },
      std::ios::out | std::ios::binary);
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// generation,episode,step,agent,action,reward,seed; one row per agent-step.
inline void write_episodes_csv(std::ostream& o, int generation, const std::vector<Trajectory>& episodes) {
  o << "generation,episode,step,agent,action,reward,seed\n";
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const auto& tr = episodes[e];
    for (std::size_t t = 0; t < tr.steps.size(); ++t)
      for (std::size_t i = 0; i < tr.steps[t].joint.size(); ++i)
        o << generation << ',' << e << ',' << t << ',' << i + 1 << ',' << index_of(tr.steps[t].joint[i]) << ','
          << format_real(tr.steps[t].reward) << ',' << tr.seed << '\n';
  }
}

/// generation,episode,seed,total_return; one row per episode.
inline void write_episode_totals_csv(std::ostream& o, int generation, const std::vector<Trajectory>& episodes) {
  o << "generation,episode,seed,total_return\n";
  for (std::size_t e = 0; e < episodes.size(); ++e)
    o << generation << ',' << e << ',' << episodes[e].seed << ',' << format_real(episodes[e].total_return) << '\n';
}

inline void write_summary_csv(std::ostream& o, const std::vector<GenerationRecord>& records) {
  o << "generation,updated_agent,n_episodes,mean,sd,ci95_low,ci95_high\n";
  for (const auto& r : records) {
    o << r.generation << ',';
    if (r.updated_agent) o << *r.updated_agent;
    o << ',' << r.summary.n_episodes << ',' << format_real(r.summary.mean) << ','
      << format_real(r.summary.sample_sd) << ',' << format_real(r.summary.ci95_low) << ','
      << format_real(r.summary.ci95_high) << '\n';
  }
}

inline void write_plot_data_csv(std::ostream& o, const std::vector<GenerationRecord>& records) {
  o << "generation,mean,ci95_low,ci95_high\n";
  for (const auto& r : records)
    o << r.generation << ',' << format_real(r.summary.mean) << ',' << format_real(r.summary.ci95_low) << ','
      << format_real(r.summary.ci95_high) << '\n';
}

/// summary.csv and plot_data.csv under out_dir.
inline void write_results(const std::vector<GenerationRecord>& records, const std::filesystem::path& out_dir) {
  write_file_atomic(out_dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, records); });
  write_file_atomic(out_dir / "plot_data.csv", [&](std::ostream& o) { write_plot_data_csv(o, records); });
}

}  // namespace abc
