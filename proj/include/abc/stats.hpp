#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "abc/errors.hpp"

namespace abc {

struct ReturnSummary {
  std::size_t n_episodes = 0;
  double mean = 0.0;
  double sample_sd = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;

  double half_width() const noexcept { return ci95_high - mean; }
  friend bool operator==(const ReturnSummary&, const ReturnSummary&) = default;
};

/// Mean, n-1 standard deviation and a normal-approximation 95% interval.
/// A single sample gets sd 0 and a zero-width interval.
inline ReturnSummary summarize_returns(std::span<const double> returns) {
  if (returns.empty()) throw ArgumentError("summarize_returns: empty return list");
  ReturnSummary s;
  s.n_episodes = returns.size();
  double sum = 0.0;
  for (double r : returns) sum += r;
  s.mean = sum / static_cast<double>(s.n_episodes);
  if (s.n_episodes >= 2) {
    double ss = 0.0;
    for (double r : returns) ss += (r - s.mean) * (r - s.mean);
    s.sample_sd = std::sqrt(ss / static_cast<double>(s.n_episodes - 1));
  }
  const double half = s.n_episodes >= 2 ? 1.96 * s.sample_sd / std::sqrt(static_cast<double>(s.n_episodes)) : 0.0;
  s.ci95_low = s.mean - half;
  s.ci95_high = s.mean + half;
  return s;
}

}  // namespace abc
