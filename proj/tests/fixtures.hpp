#ifndef ISCHED_TESTS_FIXTURES_HPP_
#define ISCHED_TESTS_FIXTURES_HPP_

// Shared fixtures and brute-force oracles. The oracles only use the data
// model accessors, never the solver code.

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "isched/generator.hpp"
#include "isched/model.hpp"
#include "isched/usage_profile.hpp"

namespace fixtures {

using namespace isched;

inline Task task(const std::string& id, Time d, Time e, Time l, std::vector<Units> r) {
  Task t;
  t.id = id;
  t.duration = d;
  t.earliest_start = e;
  t.deadline = l;
  t.demands = std::move(r);
  return t;
}

// One resource k1 (c=1); A(2,0,4,2) B(2,0,4,1) C(2,0,4,2); A→B.
inline Instance toy_a() {
  return Instance({task("A", 2, 0, 4, {2}), task("B", 2, 0, 4, {1}), task("C", 2, 0, 4, {2})},
                  {{"k1", Rational(1)}}, {{"A", "B"}});
}

// TOY-A with r_C = 1.
inline Instance toy_a_prime() {
  return Instance({task("A", 2, 0, 4, {2}), task("B", 2, 0, 4, {1}), task("C", 2, 0, 4, {1})},
                  {{"k1", Rational(1)}}, {{"A", "B"}});
}

// Three singleton processes on one unit-cost resource. B and C are pinned to
// [0,2) and [2,4); A may start anywhere in [0,4]. Committing A first puts it
// at 0 under both TV and MCT, which costs 2; placing B and C first pushes A
// to 4 and reaches the optimum 1.
inline Instance toy_ord() {
  return Instance({task("A", 2, 0, 6, {1}), task("B", 2, 0, 2, {1}), task("C", 2, 2, 4, {1})},
                  {{"k1", Rational(1)}}, {});
}

inline Schedule schedule(std::initializer_list<std::pair<const std::string, Time>> s) {
  Schedule out;
  out.starts = std::map<std::string, Time>(s);
  return out;
}

// Σ_k c_k max_t usage, recomputed from scratch.
inline Rational direct_objective(const Instance& inst, const std::vector<Time>& starts) {
  Rational total(0);
  for (std::size_t k = 0; k < inst.num_resources(); ++k) {
    Units peak = 0;
    for (Time t = inst.horizon_begin(); t < inst.horizon_end(); ++t) {
      Units u = 0;
      for (std::size_t i = 0; i < inst.num_tasks(); ++i) {
        if (starts[i] <= t && t < starts[i] + inst.task(i).duration) u += inst.task(i).demands[k];
      }
      peak = std::max(peak, u);
    }
    total = total + inst.resources()[k].unit_cost * Rational(peak);
  }
  return total;
}

// Exhaustive search over all window- and precedence-feasible start vectors.
// Depth-first in task order; a branch is cut once its partial cost reaches
// the best complete cost (partial peaks only grow).
struct BruteForce {
  std::optional<Rational> optimum;
  std::vector<Time> argmin;
  std::size_t feasible = 0;  // counted only when `count_all`
};

// `background`, when given, is added to the usage of the enumerated tasks and
// may extend beyond the instance horizon.
inline BruteForce brute_force(const Instance& inst, const UsageProfile* background = nullptr,
                              bool count_all = false) {
  const std::size_t n = inst.num_tasks();
  const std::size_t K = inst.num_resources();
  Time begin = inst.horizon_begin();
  Time end = inst.horizon_end();
  if (background) {
    begin = std::min(begin, background->begin());
    end = std::max(end, background->end());
  }
  const Time span = std::max<Time>(end - begin, 1);
  std::vector<std::vector<Units>> use(K, std::vector<Units>(static_cast<std::size_t>(span), 0));
  if (background) {
    for (std::size_t k = 0; k < K; ++k) {
      for (Time t = 0; t < span; ++t) use[k][t] = background->at(k, begin + t);
    }
  }
  std::vector<std::vector<std::size_t>> preds(n);
  for (const auto& p : inst.precedence()) preds[inst.index_of(p.succ)].push_back(inst.index_of(p.pred));
  std::vector<Time> starts(n, 0);
  BruteForce out;

  auto cost = [&]() {
    Rational c(0);
    for (std::size_t k = 0; k < K; ++k) {
      Units peak = 0;
      for (Units u : use[k]) peak = std::max(peak, u);
      c = c + inst.resources()[k].unit_cost * Rational(peak);
    }
    return c;
  };

  std::function<void(std::size_t)> dfs = [&](std::size_t i) {
    if (!count_all && out.optimum && cost() >= *out.optimum) return;
    if (i == n) {
      // Precedence into earlier-indexed successors is checked here.
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t p : preds[j]) {
          if (starts[p] + inst.task(p).duration > starts[j]) return;
        }
      }
      ++out.feasible;
      Rational c = cost();
      if (!out.optimum || c < *out.optimum) {
        out.optimum = c;
        out.argmin = starts;
      }
      return;
    }
    const Task& t = inst.task(i);
    for (Time s = t.earliest_start; s <= t.latest_start(); ++s) {
      bool ok = true;
      for (std::size_t p : preds[i]) {
        if (p < i && starts[p] + inst.task(p).duration > s) ok = false;
      }
      if (!ok) continue;
      starts[i] = s;
      for (std::size_t k = 0; k < K; ++k) {
        for (Time u = s; u < s + t.duration; ++u) use[k][u - begin] += t.demands[k];
      }
      dfs(i + 1);
      for (std::size_t k = 0; k < K; ++k) {
        for (Time u = s; u < s + t.duration; ++u) use[k][u - begin] -= t.demands[k];
      }
    }
  };
  dfs(0);
  return out;
}

// Small generated instance suitable for exhaustive enumeration.
inline GenConfig tiny_config(std::uint64_t seed, std::size_t processes = 3, std::size_t max_tasks = 8) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.processes = processes;
  cfg.min_tasks = processes;
  cfg.max_tasks = max_tasks;
  cfg.num_resources = 1 + seed % 2;
  cfg.min_duration = 1;
  cfg.max_duration = 3;
  cfg.slack = 0.7;
  cfg.max_demand = 3;
  cfg.max_cost = 4;
  return cfg;
}

}  // namespace fixtures

#endif  // ISCHED_TESTS_FIXTURES_HPP_
