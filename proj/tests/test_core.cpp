#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "isched/error.hpp"
#include "isched/generator.hpp"
#include "isched/model.hpp"
#include "isched/rational.hpp"
#include "isched/usage_profile.hpp"

using namespace isched;
using fixtures::schedule;
using fixtures::task;

TEST_CASE("rational arithmetic stays in lowest terms") {
  Rational a(1, 3), b(1, 6);
  CHECK(a + b == Rational(1, 2));
  CHECK(a - b == Rational(1, 6));
  CHECK(a * b == Rational(1, 18));
  CHECK(a / b == Rational(2));
  CHECK(Rational(4, -6) == Rational(-2, 3));
  CHECK(Rational(-2, 3).den() == 3);
  CHECK(Rational(3, 4) < Rational(4, 5));
  CHECK(Rational::parse("6/4") == Rational(3, 2));
  CHECK(Rational::parse("-1.25") == Rational(-5, 4));
  CHECK(Rational::parse("7") == Rational(7));
  CHECK(Rational(3, 2).to_string() == "3/2");
  CHECK(Rational(5).to_string() == "5");
  CHECK_THROWS_AS(Rational(1, 0), Error);
  CHECK_THROWS_AS(Rational::parse("x"), Error);
  CHECK_THROWS_AS(Rational(INT64_MAX) + Rational(1), Error);
}

TEST_CASE("validate_instance") {
  CHECK(validate_instance(fixtures::toy_a()).ok());

  Instance cyc({task("A", 2, 0, 4, {2}), task("B", 2, 0, 4, {1}), task("C", 2, 0, 4, {2})}, {{"k1", Rational(1)}},
               {{"A", "B"}, {"B", "A"}});
  auto rep = validate_instance(cyc);
  REQUIRE(rep.has(ViolationKind::kCycle));
  bool found = false;
  for (const auto& m : rep.messages()) found = found || m.find("cycle A→B→A") != std::string::npos;
  CHECK(found);

  Instance small({task("A", 2, 0, 1, {2}), task("B", 2, 0, 4, {1}), task("C", 2, 0, 4, {2})}, {{"k1", Rational(1)}},
                 {{"A", "B"}});
  rep = validate_instance(small);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].kind == ViolationKind::kWindowTooSmall);
  CHECK(rep.violations[0].message == "window too small for A");

  Instance bad({task("A", 0, -1, 4, {-1, 0}), task("A", 1, 0, 4, {1})}, {{"k1", Rational(-1)}, {"k1", Rational(1)}},
               {{"A", "A"}, {"A", "Z"}});
  rep = validate_instance(bad);
  for (auto k : {ViolationKind::kDuplicateTaskId, ViolationKind::kDuplicateResourceId, ViolationKind::kUnknownTask,
                 ViolationKind::kSelfLoop, ViolationKind::kNonPositiveDuration, ViolationKind::kNegativeEarliestStart,
                 ViolationKind::kNegativeCost, ViolationKind::kNegativeDemand}) {
    CHECK(rep.has(k));
  }
}

TEST_CASE("check_schedule examples") {
  Instance a = fixtures::toy_a();
  CHECK(check_schedule(a, schedule({{"A", 0}, {"B", 2}, {"C", 2}})).feasible);

  auto prec = check_schedule(a, schedule({{"A", 0}, {"B", 1}, {"C", 0}}));
  CHECK_FALSE(prec.feasible);
  REQUIRE(prec.diagnostics.size() == 1);
  CHECK(prec.diagnostics[0] == "precedence A→B violated: 0+2 > 1");

  auto win = check_schedule(a, schedule({{"A", 0}, {"B", 2}, {"C", 3}}));
  CHECK_FALSE(win.feasible);
  REQUIRE(win.diagnostics.size() == 1);
  CHECK(win.diagnostics[0].find("start of C (3) outside window [0, 2]") != std::string::npos);

  try {
    check_schedule(a, schedule({{"A", 0}}));
    FAIL("expected missing assignments");
  } catch (const ConstraintError& e) {
    CHECK(std::string(e.what()) == "missing assignments");
    CHECK(e.details() == std::vector<std::string>{"B", "C"});
  }
}

TEST_CASE("objective_cost examples") {
  Instance a = fixtures::toy_a();
  CHECK(objective_cost(a, schedule({{"A", 0}, {"B", 2}, {"C", 0}})) == Rational(4));
  CHECK(objective_cost(a, schedule({{"A", 0}, {"B", 2}, {"C", 2}})) == Rational(3));
  CHECK(objective_cost(Instance(), Schedule()) == Rational(0));
  CHECK_THROWS_AS(objective_cost(a, schedule({{"A", 0}, {"B", 1}, {"C", 0}})), ConstraintError);
  CHECK(provisioned_capacities(a, schedule({{"A", 0}, {"B", 1}, {"C", 0}})) == std::vector<Units>{5});
}

TEST_CASE("build_usage_profile examples") {
  Instance a = fixtures::toy_a();
  auto row = [](const UsageProfile& p) { return std::vector<Units>(p.row(0).begin(), p.row(0).end()); };
  CHECK(row(build_usage_profile(a, schedule({{"A", 0}}))) == std::vector<Units>{2, 2, 0, 0});
  CHECK(build_usage_profile(a, Schedule()).is_zero());
  CHECK(row(build_usage_profile(a, schedule({{"A", 0}, {"B", 2}, {"C", 2}}))) == std::vector<Units>{2, 2, 3, 3});
  CHECK_THROWS_AS(build_usage_profile(a, schedule({{"C", 3}})), ConstraintError);
}

TEST_CASE("usage profile arithmetic") {
  UsageProfile p(2, 5, 6);
  Task t = task("x", 3, 5, 11, {2, 1});
  p.add(t, 6);
  CHECK(p.at(0, 6) == 2);
  CHECK(p.at(0, 9) == 0);
  CHECK(p.at(1, 100) == 0);
  CHECK(p.peaks() == std::vector<Units>{2, 1});
  CHECK(p.window_sum(0, 0, 7) == 4);
  CHECK(p.peak_cost(std::vector<ResourceKind>{{"a", Rational(1, 2)}, {"b", Rational(3)}}) == Rational(4));
  p.remove(t, 6);
  CHECK(p.is_zero());
  CHECK_THROWS_AS(p.remove(t, 6), Error);
}

TEST_CASE("lower_bound examples") {
  auto lb = lower_bound(fixtures::toy_a());
  CHECK(lb.per_resource == std::vector<Units>{3});
  CHECK(lb.opt == Rational(3));

  Instance tight({task("x", 5, 0, 5, {7, 2})}, {{"a", Rational(1)}, {"b", Rational(2)}}, {});
  CHECK(lower_bound(tight).per_resource == std::vector<Units>{7, 2});
  CHECK(lower_bound(tight).opt == Rational(11));

  Instance zero({task("x", 2, 0, 5, {0}), task("y", 1, 0, 3, {0})}, {{"a", Rational(4)}}, {});
  CHECK(lower_bound(zero).opt == Rational(0));
}

TEST_CASE("apply_delta examples") {
  Instance a = fixtures::toy_a();
  ReconfigDelta d;
  d.modified["C"] = task("C", 2, 0, 4, {1});
  Instance a2 = apply_delta(a, d);
  CHECK(a2 == fixtures::toy_a_prime());
  CHECK(a == fixtures::toy_a());
  CHECK(*fixtures::brute_force(a2).optimum == Rational(2));

  CHECK(apply_delta(a, ReconfigDelta()) == a);

  ReconfigDelta rm;
  rm.removed = {"A"};
  CHECK_THROWS_AS(apply_delta(a, rm), ConstraintError);
  rm.removed_precedence = {{"A", "B"}};
  Instance without = apply_delta(a, rm);
  CHECK(without.num_tasks() == 2);
  CHECK(without.precedence().empty());

  ReconfigDelta dangling;
  dangling.modified["Z"] = task("Z", 1, 0, 2, {1});
  CHECK_THROWS_AS(apply_delta(a, dangling), Error);

  ReconfigDelta add;
  add.added = {task("D", 1, 0, 4, {1})};
  add.added_precedence = {{"C", "D"}};
  Instance grown = apply_delta(a, add);
  CHECK(grown.num_tasks() == 4);
  CHECK(grown.precedence().size() == 2);
}

TEST_CASE("brute force agrees with the TOY-A derivation") {
  auto bf = fixtures::brute_force(fixtures::toy_a(), nullptr, true);
  CHECK(bf.feasible == 3);
  CHECK(*bf.optimum == Rational(3));
  CHECK(bf.argmin == std::vector<Time>{0, 2, 2});
}

namespace {

// Direct reading of the feasibility constraints, independent of check_schedule.
bool direct_feasible(const Instance& inst, const std::vector<Time>& s) {
  for (const auto& p : inst.precedence()) {
    auto i = inst.index_of(p.pred), j = inst.index_of(p.succ);
    if (s[i] + inst.task(i).duration > s[j]) return false;
  }
  for (std::size_t i = 0; i < inst.num_tasks(); ++i) {
    if (s[i] < inst.task(i).earliest_start || s[i] > inst.task(i).deadline - inst.task(i).duration) return false;
  }
  return true;
}

Instance random_tiny(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_dist(1, 4), d_dist(1, 3), e_dist(0, 3), slack(0, 2), r_dist(0, 3);
  const int n = n_dist(rng);
  std::vector<Task> tasks;
  for (int i = 0; i < n; ++i) {
    Time d = d_dist(rng), e = e_dist(rng);
    tasks.push_back(task("t" + std::to_string(i), d, e, e + d + slack(rng), {r_dist(rng), r_dist(rng)}));
  }
  std::vector<Precedence> prec;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng() % 3 == 0) prec.push_back({tasks[i].id, tasks[j].id});
    }
  }
  return Instance(tasks, {{"a", Rational(static_cast<std::int64_t>(rng() % 4))}, {"b", Rational(1, 2)}}, prec);
}

}  // namespace

TEST_CASE("property: check_schedule matches a direct re-implementation") {
  std::mt19937_64 rng(11);
  std::size_t compared = 0;
  for (int trial = 0; trial < 150; ++trial) {
    Instance inst = random_tiny(rng);
    // Enumerate every start vector in a box slightly larger than the windows.
    std::vector<Time> s(inst.num_tasks());
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == s.size()) {
        std::vector<std::optional<Time>> opt(s.begin(), s.end());
        CHECK(check_schedule(inst, make_schedule(inst, opt)).feasible == direct_feasible(inst, s));
        ++compared;
        return;
      }
      for (Time t = inst.task(i).earliest_start - 1; t <= inst.task(i).latest_start() + 1; ++t) {
        s[i] = t;
        rec(i + 1);
      }
    };
    rec(0);
  }
  CHECK(compared > 1000);
}

TEST_CASE("property: objective scales with the cost vector") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto gen = generate_instance(fixtures::tiny_config(seed));
    const Instance& inst = gen.instance;
    Rational base = objective_cost(inst, gen.witness);
    CHECK(base == fixtures::direct_objective(inst, [&] {
            std::vector<Time> s;
            for (const auto& t : inst.tasks()) s.push_back(gen.witness.starts.at(t.id));
            return s;
          }()));
    for (Rational lambda : {Rational(3), Rational(2, 7)}) {
      std::vector<ResourceKind> res = inst.resources();
      for (auto& r : res) r.unit_cost = r.unit_cost * lambda;
      Instance scaled(inst.tasks(), res, inst.precedence());
      CHECK(objective_cost(scaled, gen.witness) == base * lambda);
    }
  }
}

TEST_CASE("property: profiles of disjoint partial schedules add up") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto gen = generate_instance(fixtures::tiny_config(seed));
    Schedule s1, s2;
    std::size_t i = 0;
    for (const auto& [id, t] : gen.witness.starts) ((i++ % 2) ? s1 : s2).starts[id] = t;
    UsageProfile sum = build_usage_profile(gen.instance, s1) + build_usage_profile(gen.instance, s2);
    CHECK(sum == build_usage_profile(gen.instance, gen.witness));
  }
}

TEST_CASE("property: the lower bound never exceeds the enumerated optimum") {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto gen = generate_instance(fixtures::tiny_config(seed, 2 + seed % 3, 10));
    REQUIRE(gen.instance.num_tasks() <= 10);
    auto bf = fixtures::brute_force(gen.instance);
    REQUIRE(bf.optimum);
    CHECK(lower_bound(gen.instance).opt <= *bf.optimum);
    ++checked;
  }
  CHECK(checked == 60);
}
