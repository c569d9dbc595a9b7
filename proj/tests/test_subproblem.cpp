#include <doctest.h>

#include <algorithm>
#include <functional>

#include "fixtures.hpp"
#include "isched/decomposition.hpp"
#include "isched/error.hpp"
#include "isched/subproblem.hpp"

using namespace isched;
using fixtures::task;

namespace {

ProcessGraph cold_graph(const Instance& inst) {
  return build_process_graph(inst, decompose_processes(inst), inst.empty_profile(),
                             std::vector<Units>(inst.num_resources(), 0));
}

std::vector<Units> row0(const UsageProfile& p) { return {p.row(0).begin(), p.row(0).end()}; }

struct Enumerated {
  Rational cost;
  std::vector<Time> starts;
};

// Every feasible local assignment with its peak-form cost over background + local.
std::vector<Enumerated> enumerate(const SubproblemSpec& spec) {
  std::vector<Enumerated> out;
  std::vector<Time> s(spec.tasks.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == s.size()) {
      for (auto [a, b] : spec.edges) {
        if (s[a] + spec.tasks[a].duration > s[b]) return;
      }
      UsageProfile u = spec.background;
      for (std::size_t j = 0; j < s.size(); ++j) u.add(spec.tasks[j], s[j]);
      Rational c(0);
      for (std::size_t k = 0; k < spec.resources.size(); ++k) {
        Units peak = 0;
        for (Time t = u.begin(); t < u.end(); ++t) peak = std::max(peak, u.at(k, t));
        c = c + spec.resources[k].unit_cost * Rational(peak);
      }
      out.push_back({c, s});
      return;
    }
    for (Time t = spec.tasks[i].earliest_start; t <= spec.tasks[i].latest_start(); ++t) {
      s[i] = t;
      rec(i + 1);
    }
  };
  rec(0);
  std::sort(out.begin(), out.end(), [](const Enumerated& a, const Enumerated& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.starts < b.starts;
  });
  return out;
}

// Commits processes 0..n-1 in id order using the best exact candidate.
struct Rollout {
  UsageProfile rpu;
  ProcessGraph graph;
  Schedule schedule;
};

Rollout roll(const Instance& inst, std::size_t m = 2) {
  Rollout r{inst.empty_profile(), cold_graph(inst), {}};
  int it = 1;
  for (ProcessId v = 0; v < r.graph.size(); ++v) {
    SubproblemSpec spec = construct_subproblem(r.graph, v, r.rpu, inst);
    auto cands = solve_subproblem(spec, m, 7);
    REQUIRE_FALSE(cands.empty());
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) r.schedule.starts[spec.tasks[i].id] = cands.back().starts[i];
    auto res = commit(r.rpu, cands.back(), r.graph, v, it++, inst);
    r.rpu = res.rpu;
    r.graph = res.graph;
  }
  return r;
}

}  // namespace

TEST_CASE("construct_subproblem examples") {
  Instance a = fixtures::toy_a();
  ProcessGraph g = cold_graph(a);
  SubproblemSpec first = construct_subproblem(g, 0, a.empty_profile(), a);
  CHECK(first.tasks.size() == 2);
  CHECK(first.edges == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
  CHECK(first.background.is_zero());

  auto res = commit(a.empty_profile(), make_candidate(first, {0, 2}), g, 0, 1, a);
  SubproblemSpec c = construct_subproblem(res.graph, 1, res.rpu, a);
  REQUIRE(c.tasks.size() == 1);
  CHECK(c.tasks[0].id == "C");
  CHECK(c.edges.empty());
  CHECK(row0(c.background) == std::vector<Units>{2, 2, 1, 1});

  CHECK_THROWS_AS(construct_subproblem(res.graph, 0, res.rpu, a), Error);
  CHECK_THROWS_AS(construct_subproblem(res.graph, 5, res.rpu, a), Error);
}

TEST_CASE("solve_exact examples") {
  Instance a = fixtures::toy_a();
  ProcessGraph g = cold_graph(a);
  SubproblemSpec ab = construct_subproblem(g, 0, a.empty_profile(), a);
  auto one = solve_exact(ab, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].starts == std::vector<Time>{0, 2});
  CHECK(one[0].objective == Rational(2));

  auto res = commit(a.empty_profile(), one[0], g, 0, 1, a);
  SubproblemSpec c = construct_subproblem(res.graph, 1, res.rpu, a);
  auto two = solve_exact(c, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].starts == std::vector<Time>{2});
  CHECK(two[0].objective == Rational(3));
  CHECK(two[1].starts == std::vector<Time>{0});
  CHECK(two[1].objective == Rational(4));
  CHECK(row0(two[0].local) == std::vector<Units>{0, 0, 2, 2});
  CHECK(two[0].caps == std::vector<Units>{3});

  Instance forced({task("x", 3, 2, 5, {1})}, {{"k", Rational(1)}}, {});
  SubproblemSpec fs = construct_subproblem(cold_graph(forced), 0, forced.empty_profile(), forced);
  auto only = solve_exact(fs, 2);
  REQUIRE(only.size() == 1);
  CHECK(only[0].starts == std::vector<Time>{2});
}

TEST_CASE("subproblem infeasibility is reported") {
  Instance bad({task("a", 3, 0, 4, {1}), task("b", 3, 0, 4, {1})}, {{"k", Rational(1)}}, {{"a", "b"}});
  SubproblemSpec spec = construct_subproblem(cold_graph(bad), 0, bad.empty_profile(), bad);
  CHECK_THROWS_AS(solve_exact(spec, 2), InfeasibleError);
  CHECK_THROWS_AS(solve_heuristic(spec, 2, 0), InfeasibleError);
  CHECK_THROWS_AS(make_candidate(spec, {0, 1}), ConstraintError);
}

TEST_CASE("solve_heuristic examples") {
  Instance a = fixtures::toy_a();
  ProcessGraph g = cold_graph(a);
  SubproblemSpec ab = construct_subproblem(g, 0, a.empty_profile(), a);
  auto res = commit(a.empty_profile(), make_candidate(ab, {0, 2}), g, 0, 1, a);
  SubproblemSpec c = construct_subproblem(res.graph, 1, res.rpu, a);
  auto h = solve_heuristic(c, 2, 42);
  bool has_two = false;
  for (const auto& x : h) has_two = has_two || x.starts == std::vector<Time>{2};
  CHECK(has_two);

  SubproblemSpec empty = c;
  empty.tasks.clear();
  empty.task_indices.clear();
  auto e = solve_heuristic(empty, 2, 1);
  REQUIRE(e.size() == 1);
  CHECK(e[0].starts.empty());
  CHECK(e[0].local.is_zero());

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto gen = generate_instance(fixtures::tiny_config(seed, 1, 20));
    SubproblemSpec s = construct_subproblem(cold_graph(gen.instance), 0, gen.instance.empty_profile(), gen.instance);
    auto h1 = solve_heuristic(s, 3, seed);
    auto h2 = solve_heuristic(s, 3, seed);
    REQUIRE(h1.size() == h2.size());
    for (std::size_t i = 0; i < h1.size(); ++i) {
      CHECK(h1[i].starts == h2[i].starts);
      CHECK_NOTHROW(make_candidate(s, h1[i].starts));
      if (i) CHECK(h1[i - 1].objective <= h1[i].objective);
      for (std::size_t j = 0; j < i; ++j) CHECK(h1[i].starts != h1[j].starts);
    }
  }
}

TEST_CASE("commit examples") {
  Instance a = fixtures::toy_a();
  ProcessGraph g = cold_graph(a);
  SubproblemSpec ab = construct_subproblem(g, 0, a.empty_profile(), a);
  auto cand = make_candidate(ab, {0, 2});
  auto res = commit(a.empty_profile(), cand, g, 0, 1, a);
  CHECK(row0(res.rpu) == std::vector<Units>{2, 2, 1, 1});
  CHECK(res.graph.candidates() == std::vector<ProcessId>{1});
  CHECK(res.graph.node_features[0][2] == 1.0);
  CHECK(res.graph.caps == std::vector<Units>{2});
  CHECK_THROWS_AS(commit(res.rpu, cand, res.graph, 0, 2, a), Error);

  SubproblemSpec c = construct_subproblem(res.graph, 1, res.rpu, a);
  auto done = commit(res.rpu, solve_exact(c, 1)[0], res.graph, 1, 2, a);
  CHECK(done.graph.candidates().empty());
  CHECK(done.graph.node_features[1][2] == 2.0);
}

TEST_CASE("property: exact pools equal the enumerated ranking") {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    auto gen = generate_instance(fixtures::tiny_config(seed, 2, 10));
    const Instance& inst = gen.instance;
    // Background: the other process at its witness starts.
    ProcessGraph g = cold_graph(inst);
    Schedule other;
    for (auto t : g.processes[1].tasks) other.starts[inst.task(t).id] = gen.witness.starts.at(inst.task(t).id);
    UsageProfile bg = build_usage_profile(inst, other);
    SubproblemSpec spec = construct_subproblem(g, 0, bg, inst);
    if (spec.tasks.size() > 8) continue;
    auto truth = enumerate(spec);
    REQUIRE_FALSE(truth.empty());
    for (std::size_t m : {1u, 2u, 3u}) {
      auto got = solve_exact(spec, m);
      REQUIRE(got.size() == std::min(m, truth.size()));
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].starts == truth[i].starts);
        CHECK(got[i].objective == truth[i].cost);
        // Peak form equals Σ c_k R_k with R_k from the combined profile.
        UsageProfile combined = bg + got[i].local;
        CHECK(got[i].caps == combined.peaks());
        CHECK(combined.peak_cost(spec.resources) == got[i].objective);
      }
    }
    ++checked;
  }
  CHECK(checked >= 60);
}

TEST_CASE("property: commit then subtract restores the pool") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto gen = generate_instance(fixtures::tiny_config(seed, 3, 9));
    const Instance& inst = gen.instance;
    ProcessGraph g = cold_graph(inst);
    UsageProfile rpu = inst.empty_profile();
    for (ProcessId v = 0; v < g.size(); ++v) {
      SubproblemSpec spec = construct_subproblem(g, v, rpu, inst);
      auto cand = solve_subproblem(spec, 2, seed).front();
      auto res = commit(rpu, cand, g, v, static_cast<int>(v) + 1, inst);
      UsageProfile back = res.rpu;
      back -= cand.local;
      CHECK(back == rpu);
      rpu = res.rpu;
      g = res.graph;
    }
  }
}

TEST_CASE("property: assembled schedules are feasible") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto cfg = fixtures::tiny_config(seed, 1 + seed % 5, 16 + seed % 10);
    cfg.max_duration = 4;
    cfg.slack = 1.0;
    auto gen = generate_instance(cfg);
    Rollout r = roll(gen.instance);
    CHECK(r.graph.candidates().empty());
    auto verdict = check_schedule(gen.instance, r.schedule);
    CHECK(verdict.feasible);
    CHECK(build_usage_profile(gen.instance, r.schedule) == r.rpu);
  }
}
