#pragma once

// Oracle suites shared by the `abc oracle` command and the test suite:
// best-response monotonicity, joint-response convergence to a Nash
// equilibrium, MCTS convergence to exact Q values, and gradient checks.

#include <algorithm>
#include <chrono>
#include <numeric>
#include <string>
#include <vector>

#include "abc/exact_solver.hpp"
#include "abc/floor_compiler.hpp"
#include "abc/nn.hpp"
#include "abc/planner.hpp"
#include "abc/results.hpp"

namespace abc::verify {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string detail;
  double seconds = 0.0;
};

/// Random instance sizes: 2..12 states, 2 or 3 agents with 2..3 actions each,
/// horizon 2..4.
inline exact::EnumerableMmdp random_tiny_mmdp(Rng& rng, std::size_t max_agents = 2) {
  const std::size_t n_agents = 2 + rng.below(max_agents - 1);
  std::vector<std::size_t> counts(n_agents);
  for (auto& c : counts) c = 2 + rng.below(2);
  const std::size_t n_states = 2 + rng.below(11);
  const int horizon = 2 + static_cast<int>(rng.below(3));
  const double gamma = rng.bernoulli(0.5) ? 1.0 : rng.uniform(0.5, 1.0);
  return exact::random_mmdp(rng, n_states, counts, horizon, gamma);
}

namespace detail {

template <class F>
SuiteResult timed(std::string name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r = body();
  r.name = std::move(name);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline bool dominates(const exact::ValueTable& hi, const exact::ValueTable& lo) {
  for (std::size_t k = 0; k < hi.v.size(); ++k)
    if (hi.v[k] < lo.v[k] - exact::kValueTolerance * std::max(1.0, std::abs(lo.v[k]))) return false;
  return true;
}

}  // namespace detail

/// V^{BR_i(pi)} >= V^pi at every (state, t) for every agent of `instances`
/// random (MMDP, policy) pairs.
inline SuiteResult lemma1_suite(std::uint64_t seed, std::size_t instances = 100) {
  return detail::timed("lemma1", [&] {
    SuiteResult r;
    for (std::size_t k = 0; k < instances; ++k) {
      Rng rng(derive_seed(seed, {0x4c454d, k}));
      const auto m = random_tiny_mmdp(rng, 3);
      const auto pi = exact::random_joint_policy(m, rng);
      const auto V = exact::policy_values(m, pi);
      for (std::size_t i = 0; i < m.n_agents(); ++i) {
        ++r.cases;
        if (!detail::dominates(exact::policy_values(m, exact::exact_best_response(m, pi, i)), V)) {
          ++r.failures;
          if (r.detail.empty()) r.detail = "violation at instance " + std::to_string(k) + ", agent " + std::to_string(i);
        }
      }
    }
    r.passed = r.failures == 0;
    return r;
  });
}

/// Sweeps every permutation of the agents of `instances` random MMDPs: each
/// must terminate at a Nash equilibrium with a non-decreasing value trace.
inline SuiteResult corollary1_suite(std::uint64_t seed, std::size_t instances = 100) {
  return detail::timed("corollary1", [&] {
    SuiteResult r;
    for (std::size_t k = 0; k < instances; ++k) {
      Rng rng(derive_seed(seed, {0x434f52, k}));
      const auto m = random_tiny_mmdp(rng, 3);
      const auto start = exact::random_joint_policy(m, rng);
      std::vector<std::size_t> perm(m.n_agents());
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      do {
        ++r.cases;
        std::string why;
        try {
          const auto res = exact::joint_response_sweep(m, start, perm);
          for (std::size_t step = 1; step < res.value_trace.size() && why.empty(); ++step)
            for (std::size_t s = 0; s < m.n_states; ++s) {
              const double prev = res.value_trace[step - 1][s];
              if (res.value_trace[step][s] < prev - exact::kValueTolerance * std::max(1.0, std::abs(prev))) {
                why = "value decreased";
                break;
              }
            }
          if (why.empty() && !exact::is_nash(m, res.policy).is_nash) why = "fixed point is not a Nash equilibrium";
        } catch (const std::exception& e) {
          why = e.what();
        }
        if (!why.empty()) {
          ++r.failures;
          if (r.detail.empty()) r.detail = "instance " + std::to_string(k) + ": " + why;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    r.passed = r.failures == 0;
    return r;
  });
}

/// Single robot at the left end of a 1x3 corridor, one task at the right end.
inline DomainSpec corridor_spec(int horizon = 3) {
  DomainSpec s;
  s.width = 3;
  s.height = 1;
  s.horizon = horizon;
  s.move_success = 0.9;
  s.robot_ids = {1};
  s.robot_starts = {{0, 0}};
  s.fixed_tasks = {{{0, 2}, 1}};
  return s;
}

struct ConvergenceOptions {
  std::size_t runs = 100;
  std::size_t iterations = 50'000;
  double exploration = 0.5;
  double tolerance = 0.05;
  std::size_t required = 95;
};

/// Largest |Q~ - Q| over the root actions of one search on the corridor.
inline double corridor_q_error(const DomainSpec& spec, const exact::QTable& Q, std::uint32_t root_state,
                               const MctsParams& params, std::uint64_t seed) {
  const PolicyHandle rollout = make_heuristic_policy(spec);
  ProjectedFloor sim(spec, 0, {nullptr}, rollout, params.diy_bonus);
  SparseUct<ProjectedFloor> uct(sim, params);
  Rng rng(seed);
  uct.search(initial_state(spec), rng);
  double worst = 0.0;
  for (std::size_t a = 0; a < kNumActions; ++a)
    worst = std::max(worst, std::abs(uct.root_action(a).q_estimate() - Q.at(root_state, 0, a)));
  return worst;
}

/// Root Q estimates of `runs` independent searches against the exact Q
/// values; at least `required` runs must be within `tolerance`.
inline SuiteResult mcts_convergence_suite(std::uint64_t seed, const ConvergenceOptions& o = {}) {
  return detail::timed("mcts_convergence", [&] {
    SuiteResult r;
    const DomainSpec spec = corridor_spec();
    const CompiledFloor f = compile_floor(spec);
    const exact::QTable Q = exact::exact_q_values(f.mmdp, exact::constant_policy(f.mmdp), 0);
    MctsParams params;
    params.iterations = o.iterations;
    params.exploration = o.exploration;
    params.diy_bonus = 0.0;  // the exact values carry no bonus
    std::vector<double> errors(o.runs);
    parallel_for(o.runs, 0, [&](std::size_t k) {
      errors[k] = corridor_q_error(spec, Q, f.initial, params, derive_seed(seed, {0x4d4354, k}));
    });
    for (double e : errors) {
      ++r.cases;
      r.failures += e > o.tolerance;
    }
    r.passed = r.cases - r.failures >= o.required;
    r.detail = std::to_string(r.cases - r.failures) + "/" + std::to_string(r.cases) + " runs within " +
               format_real(o.tolerance) + ", worst error " +
               format_real(*std::max_element(errors.begin(), errors.end()));
    return r;
  });
}

/// Random dense input and label for gradient checks.
inline nn::Sample random_sample(const nn::NetworkArch& arch, Rng& rng) {
  nn::Sample s;
  s.input.resize(arch.input_channels * arch.height * arch.width);
  for (auto& v : s.input) v = rng.uniform(0.05, 1.0);  // dense: no input sits exactly on a ReLU kink
  s.label = rng.below(arch.fc3);
  return s;
}

/// Worst relative error of gradient_check over `pairs` seeded (model, sample) pairs.
inline SuiteResult gradient_suite(std::uint64_t seed, std::size_t pairs = 20, double max_error = 1e-4) {
  return detail::timed("gradient_check", [&] {
    SuiteResult r;
    nn::NetworkArch arch;
    arch.input_channels = 4;
    arch.height = 4;
    arch.width = 6;
    double worst = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
      Rng rng(derive_seed(seed, {0x475244, k}));
      const nn::PolicyModel model = nn::init_weights(arch, rng());
      const nn::Sample s = random_sample(arch, rng);
      const double err = nn::gradient_check(model, s.input, s.label, 1e-5);
      worst = std::max(worst, err);
      ++r.cases;
      r.failures += !(err < max_error);
    }
    r.passed = r.failures == 0;
    r.detail = "worst relative error " + format_real(worst);
    return r;
  });
}

inline std::vector<std::string> suite_names() { return {"lemma1", "corollary1", "mcts", "gradient"}; }

/// Runs one named suite, or all of them for "all".
inline std::vector<SuiteResult> run_suites(const std::string& which, std::uint64_t seed) {
  std::vector<SuiteResult> out;
  const bool all = which == "all";
  if (all || which == "lemma1") out.push_back(lemma1_suite(seed));
  if (all || which == "corollary1") out.push_back(corollary1_suite(seed));
  if (all || which == "mcts") out.push_back(mcts_convergence_suite(seed));
  if (all || which == "gradient") out.push_back(gradient_suite(seed));
  if (out.empty()) throw ArgumentError("unknown oracle suite: " + which);
  return out;
}

}  // namespace abc::verify
