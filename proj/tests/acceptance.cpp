// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <utility>

#include "fixtures.hpp"
#include "isched/bench.hpp"
#include "isched/continual.hpp"
#include "isched/dqn.hpp"
#include "isched/episode.hpp"
#include "isched/generator.hpp"
#include "isched/ripfile.hpp"
#include "isched/selector_training.hpp"
#include "reference_net.hpp"

using namespace isched;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  std::string failed;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failed += (failed.empty() ? "" : "; ") + what;
    }
  }

  std::string text() const { return failed.empty() ? detail.str() : detail.str() + " [failed: " + failed + "]"; }
};

// Small members of the Easy family: Easy's resource count and demand/cost
// ranges, 4 to 8 tasks per process and heterogeneous window slack.
GenConfig small_easy(std::uint64_t seed, std::size_t processes) {
  GenConfig c = difficulty_config(Difficulty::kEasy, seed);
  c.processes = processes;
  c.min_tasks = 4 * processes;
  c.max_tasks = 8 * processes;
  c.slack = 3.0;
  c.slack_variation = 1.0;
  return c;
}

constexpr std::size_t kTrainInstances = 400;
constexpr std::size_t kHeldOut = 20;
constexpr std::size_t kScaleInstances = 10;
constexpr std::size_t kRandSeeds = 5;
// Updated instances change 5% of the tasks, as in L-RIPLIB.
constexpr double kEvalDelta = 0.05;
constexpr double kTrainDelta = 0.05;

std::size_t train_processes(std::size_t i) { return 6 + i % 7; }

struct Trained {
  std::vector<Instance> train;
  std::vector<Instance> held_out;
  std::vector<Instance> scaled;
  std::vector<TrainingTriple> held_out_triples;
  std::vector<TrainingTriple> scaled_triples;
  std::shared_ptr<const QNetworkParams> qnet;
  std::shared_ptr<const SelectorParams> selector;
  DqnResult dqn;
  SelectorResult sel;
  double dqn_seconds = 0.0;
  double selector_seconds = 0.0;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TrainConfig acceptance_train_config() {
  TrainConfig cfg;
  cfg.net = NetConfig{32, 2, 32};
  cfg.episodes = 2000;
  return cfg;
}

SelectorTrainConfig acceptance_selector_config() {
  SelectorTrainConfig cfg;
  cfg.net = NetConfig{32, 2, 32};
  cfg.epochs = 40;
  cfg.max_tuples_per_instance = 4;
  return cfg;
}

Trained& trained() {
  static Trained t = [] {
    Trained out;
    for (std::size_t i = 0; i < kTrainInstances; ++i) {
      out.train.push_back(generate_instance(small_easy(10'000 + i, train_processes(i))).instance);
    }
    for (std::size_t i = 0; i < kHeldOut; ++i) {
      out.held_out.push_back(generate_instance(small_easy(50'000 + i, train_processes(i))).instance);
    }
    for (std::size_t i = 0; i < kScaleInstances; ++i) {
      out.scaled.push_back(generate_instance(small_easy(90'000 + i, 2 * train_processes(i))).instance);
    }
    out.held_out_triples = make_training_triples(out.held_out, kEvalDelta, 2);
    out.scaled_triples = make_training_triples(out.scaled, kEvalDelta, 3);
    auto t0 = std::chrono::steady_clock::now();
    auto triples = make_training_triples(out.train, kTrainDelta, 1);
    out.dqn = train_dqn(triples, acceptance_train_config(), SelectionPolicy::tv(), 7);
    out.qnet = std::make_shared<const QNetworkParams>(out.dqn.params);
    out.dqn_seconds = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    std::vector<std::shared_ptr<const Instance>> ptrs;
    for (const auto& q : out.train) ptrs.push_back(std::make_shared<const Instance>(q));
    auto order = OrderingPolicy::ccpm();
    auto mct = SelectionPolicy::mct();
    out.sel = train_selector(ptrs, order, mct, acceptance_selector_config(), 11);
    out.selector = std::make_shared<const SelectorParams>(out.sel.params);
    out.selector_seconds = seconds_since(t0);
    return out;
  }();
  return t;
}

using PolicyFactory = std::function<OrderingPolicy()>;
using SelectorFactory = std::function<SelectionPolicy()>;

double mean_objective(const std::vector<Instance>& set, const PolicyFactory& policy, const SelectorFactory& selector,
                      bool* all_feasible = nullptr) {
  double sum = 0.0;
  for (const auto& inst : set) {
    auto p = policy();
    auto s = selector();
    auto r = run_with_order(inst, p, s);
    if (all_feasible) *all_feasible = *all_feasible && check_schedule(inst, r.schedule).feasible;
    sum += r.objective.to_double();
  }
  return sum / static_cast<double>(set.size());
}

double mean_random_order(const std::vector<Instance>& set, const SelectorFactory& selector) {
  double sum = 0.0;
  for (std::uint64_t s = 0; s < kRandSeeds; ++s) {
    sum += mean_objective(set, [s] { return OrderingPolicy::random(100 + s); }, selector);
  }
  return sum / static_cast<double>(kRandSeeds);
}

// Reconfiguration: each triple is solved from its prior with continual_solve.
double mean_continual(const std::vector<TrainingTriple>& set, const PolicyFactory& policy,
                      const SelectorFactory& selector, bool* all_feasible = nullptr) {
  double sum = 0.0;
  for (const auto& x : set) {
    auto p = policy();
    auto s = selector();
    auto r = continual_solve(*x.original, x.prior, *x.updated, p, s);
    if (all_feasible) *all_feasible = *all_feasible && check_schedule(*x.updated, r.schedule).feasible;
    sum += r.objective.to_double();
  }
  return sum / static_cast<double>(set.size());
}

double mean_random_continual(const std::vector<TrainingTriple>& set, const SelectorFactory& selector) {
  double sum = 0.0;
  for (std::uint64_t s = 0; s < kRandSeeds; ++s) {
    sum += mean_continual(set, [s] { return OrderingPolicy::random(100 + s); }, selector);
  }
  return sum / static_cast<double>(kRandSeeds);
}

SelectorFactory tv() {
  return [] { return SelectionPolicy::tv(); };
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
  Verdict v;
  auto qnet = std::make_shared<const QNetworkParams>(QNetworkParams::init(NetConfig{16, 2, 16}, 3));
  auto sel = std::make_shared<const SelectorParams>(SelectorParams::init(NetConfig{16, 2, 16}, 4));
  const std::vector<std::string> policies{"rl", "ccpm", "mrrr", "dum", "rand"};
  const std::vector<std::string> selectors{"learned", "mad", "tv", "mct", "rand"};
  std::size_t runs = 0, at_optimum = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GenConfig cfg = fixtures::tiny_config(seed, 1 + seed % 4, 10);
    cfg.min_tasks = 4;
    const Instance inst = generate_instance(cfg).instance;
    auto bf = fixtures::brute_force(inst);
    if (!bf.optimum) {
      v.require(false, "instance " + std::to_string(seed) + " has no feasible schedule");
      continue;
    }
    v.require(lower_bound(inst).opt <= *bf.optimum, "bound above optimum on instance " + std::to_string(seed));
    for (const auto& pn : policies) {
      for (const auto& sn : selectors) {
        auto p = OrderingPolicy::from_name(pn, seed, qnet);
        auto s = SelectionPolicy::from_name(sn, seed, sel);
        auto r = run_with_order(inst, p, s);
        ++runs;
        const bool ok = check_schedule(inst, r.schedule).feasible && r.objective >= *bf.optimum &&
                        r.objective == objective_cost(inst, r.schedule);
        if (r.objective == *bf.optimum) ++at_optimum;
        v.require(ok, pn + "+" + sn + " on instance " + std::to_string(seed));
      }
    }
  }
  v.detail << runs << " runs on 50 instances, " << at_optimum << " at the optimum";
  return v;
}

Verdict criterion2() {
  Verdict v;
  const Instance inst = fixtures::toy_ord();
  auto bf = fixtures::brute_force(inst);
  std::vector<ProcessId> order{0, 1, 2};
  std::set<Rational> outcomes;
  std::optional<Rational> best;
  do {
    auto sel = SelectionPolicy::tv();
    Rational obj = run_fixed_order(inst, order, sel).objective;
    outcomes.insert(obj);
    if (!best || obj < *best) best = obj;
  } while (std::next_permutation(order.begin(), order.end()));
  v.require(outcomes.size() >= 2, "fewer than two distinct objectives");
  v.require(best && bf.optimum && *best == *bf.optimum, "best order misses the optimum");
  v.detail << "TV over 3! orders gives {";
  for (const auto& o : outcomes) v.detail << " " << o.to_string();
  v.detail << " }, optimum " << (bf.optimum ? bf.optimum->to_string() : "none");
  return v;
}

Verdict criterion3() {
  Verdict v;
  const Instance a = fixtures::toy_a();
  auto objective_with = [&](SelectionPolicy sel) { return run_fixed_order(a, {0, 1}, sel).objective; };

  // The two candidates of the {C} subproblem after {A,B} is committed.
  auto inst = std::make_shared<const Instance>(a);
  Episode ep = Episode::cold_start(inst);
  auto tv0 = SelectionPolicy::tv();
  ep.step(0, tv0);
  auto spec = ep.subproblem(1);
  auto cands = ep.solve(spec);
  std::set<Rational> finals;
  for (const auto& c : cands) {
    Episode branch = ep;
    branch.commit(spec, c);
    finals.insert(branch.objective());
  }
  v.require(finals == std::set<Rational>{Rational(3), Rational(4)}, "candidate objectives are not {3, 4}");

  const Rational tv = objective_with(SelectionPolicy::tv());
  const Rational mct = objective_with(SelectionPolicy::mct());
  const Rational learned = objective_with(SelectionPolicy::learned(trained().selector));
  v.require(tv == Rational(3), "TV did not reach 3");
  v.require(learned == Rational(3), "LEARNED did not reach 3");
  v.require(mct == Rational(4), "MCT did not give 4");
  v.detail << "TV " << tv.to_string() << ", LEARNED " << learned.to_string() << ", MCT " << mct.to_string();
  return v;
}

Verdict criterion4() {
  Verdict v;
  const NetConfig net{};
  double worst_td = 0.0, worst_rank = 0.0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Instance inst = generate_instance(fixtures::tiny_config(200 + s, 4 + s, 16)).instance;
    auto ptr = std::make_shared<const Instance>(inst);
    Episode ep = Episode::cold_start(ptr);
    auto tv = SelectionPolicy::tv();
    ep.step(0, tv);
    GraphState state = ep.state();

    auto q = QNetworkParams::init(net, 300 + s);
    std::vector<TdSample> batch{{&state, state.candidates().front(), 40.0}, {&state, state.candidates().back(), -3.0}};
    auto qg = q.zeros_like();
    td_loss(q, batch, &qg);
    worst_td = std::max(worst_td, reference::gradient_check(
                                      q, qg, [&] { return td_loss(q, batch); }, 1e-3, 24, s,
                                      [&] { return reference::qnet_signs(q, state); }));

    auto p = SelectorParams::init(net, 400 + s);
    auto spec = ep.subproblem(state.candidates().front());
    auto cands = ep.solve(spec);
    std::vector<CandidateFeatures> feats;
    std::vector<Rational> objs;
    for (const auto& c : cands) feats.push_back(candidate_features(c, spec, ep.graph(), ep.instance()));
    feats.push_back({0.3, 0.2, 2.0, 0.6, 0.1, 0.0, 0.0, 1.4});
    for (std::size_t i = 0; i < feats.size(); ++i) objs.emplace_back(static_cast<std::int64_t>(feats.size() - i));
    auto pg = p.zeros_like();
    rank_loss_params(p, state, feats, objs, &pg);
    worst_rank = std::max(worst_rank, reference::gradient_check(
                                          p, pg, [&] { return rank_loss_params(p, state, feats, objs); }, 1e-3, 24, s,
                                          [&] { return reference::selector_signs(p, state, feats); }));
  }
  v.require(worst_td < 1e-4, "TD loss gradient");
  v.require(worst_rank < 1e-4, "ranking loss gradient");
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max relative error TD %.2e, ranking %.2e over 3 states", worst_td, worst_rank);
  v.detail << buf;
  return v;
}

Verdict criterion5() {
  Verdict v;
  Trained& t = trained();
  auto q = t.qnet;
  const auto& set = t.held_out_triples;
  const double rl = mean_continual(set, [q] { return OrderingPolicy::rl(q); }, tv());
  const double rnd = mean_random_continual(set, tv());
  const double ccpm = mean_continual(set, [] { return OrderingPolicy::ccpm(); }, tv());
  const double mrrr = mean_continual(set, [] { return OrderingPolicy::mrrr(); }, tv());
  const double dum = mean_continual(set, [] { return OrderingPolicy::dum(); }, tv());
  const double best = std::min({ccpm, mrrr, dum});
  v.require(rl <= rnd, "RL above RAND");
  v.require(rl <= 1.05 * best, "RL above 1.05 x best baseline");
  // Cold start on the same instances, reported only.
  const double rl_cold = mean_objective(t.held_out, [q] { return OrderingPolicy::rl(q); }, tv());
  const double rnd_cold = mean_random_order(t.held_out, tv());
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "mean objective RL %.2f, RAND %.2f, CCPM %.2f, MRRR %.2f, DUM %.2f (%zu episodes, %.0f s); "
                "cold start RL %.2f, RAND %.2f",
                rl, rnd, ccpm, mrrr, dum, t.dqn.log.episodes.size(), t.dqn_seconds, rl_cold, rnd_cold);
  v.detail << buf;
  return v;
}

Verdict criterion6() {
  Verdict v;
  Trained& t = trained();
  auto sel = t.selector;
  auto ccpm = [] { return OrderingPolicy::ccpm(); };
  const auto& set = t.held_out_triples;
  const double learned = mean_continual(set, ccpm, [sel] { return SelectionPolicy::learned(sel); });
  double rand_ls = 0.0;
  for (std::uint64_t s = 0; s < kRandSeeds; ++s) {
    rand_ls += mean_continual(set, ccpm, [s] { return SelectionPolicy::random(200 + s); });
  }
  rand_ls /= static_cast<double>(kRandSeeds);
  const double learned_cold = mean_objective(t.held_out, ccpm, [sel] { return SelectionPolicy::learned(sel); });
  double rand_cold = 0.0;
  for (std::uint64_t s = 0; s < kRandSeeds; ++s) {
    rand_cold += mean_objective(t.held_out, ccpm, [s] { return SelectionPolicy::random(200 + s); });
  }
  rand_cold /= static_cast<double>(kRandSeeds);

  std::vector<std::shared_ptr<const Instance>> ptrs;
  for (const auto& q : t.held_out) ptrs.push_back(std::make_shared<const Instance>(q));
  auto order = OrderingPolicy::ccpm();
  auto mct = SelectionPolicy::mct();
  // Every iteration of the held-out instances; the cap only bounds training cost.
  auto all = acceptance_selector_config();
  all.max_tuples_per_instance = 0;
  auto tuples = collect_ranking_tuples(ptrs, order, mct, all);
  const double acc = ranking_accuracy(t.sel.params, tuples);
  v.require(learned <= rand_ls, "LEARNED above RAND-LS");
  v.require(acc > 0.5, "ranking accuracy not above 0.5");
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "mean objective LEARNED %.2f, RAND-LS %.2f; held-out pairwise accuracy %.3f (%zu tuples, %.0f s); "
                "cold start LEARNED %.2f, RAND-LS %.2f",
                learned, rand_ls, acc, tuples.size(), t.selector_seconds, learned_cold, rand_cold);
  v.detail << buf;
  return v;
}

Verdict criterion7() {
  Verdict v;
  std::size_t reused = 0, solves = 0, affected = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    GenConfig cfg = fixtures::tiny_config(seed, 3 + seed % 8, 40);
    cfg.min_tasks = 15;
    const Instance q = generate_instance(cfg).instance;
    auto ccpm = OrderingPolicy::ccpm();
    auto mct = SelectionPolicy::mct();
    const Schedule prior = run_with_order(q, ccpm, mct).schedule;
    const Instance q2 = apply_delta(q, generate_delta(q, 0.05, seed));
    auto init = initialize_reconfig(q, prior, q2);
    auto policy = OrderingPolicy::random(seed);
    auto tv = SelectionPolicy::tv();
    auto r = continual_solve(q, prior, q2, policy, tv);
    bool same = true;
    for (const auto& [id, t] : init.reused) same = same && r.schedule.starts.at(id) == prior.starts.at(id);
    const std::string tag = "triple " + std::to_string(seed);
    v.require(same, tag + " moved a reused task");
    v.require(r.trace.subproblem_solves <= init.candidates.size(), tag + " solved too many subproblems");
    v.require(check_schedule(q2, r.schedule).feasible, tag + " infeasible");
    reused += init.reused.size();
    solves += r.trace.subproblem_solves;
    affected += init.candidates.size();
  }
  v.detail << "200 triples, " << reused << " reused tasks kept, " << solves << " solves for " << affected
           << " affected processes";
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict criterion8() {
  Verdict v;
  Trained& t = trained();
  auto q = t.qnet;
  bool feasible = true;
  const double rl = mean_continual(t.scaled_triples, [q] { return OrderingPolicy::rl(q); }, tv(), &feasible);
  const double rnd = mean_random_continual(t.scaled_triples, tv());
  v.require(feasible, "infeasible RL schedule");
  v.require(rl < rnd, "RL not better than RAND");
  const double rl_cold = mean_objective(t.scaled, [q] { return OrderingPolicy::rl(q); }, tv());
  const double rnd_cold = mean_random_order(t.scaled, tv());
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%zu instances with 12 to 24 processes: mean objective RL %.2f, RAND %.2f; cold start RL %.2f, "
                "RAND %.2f",
                t.scaled.size(), rl, rnd, rl_cold, rnd_cold);
  v.detail << buf;
  return v;
}

Verdict criterion9() {
  Verdict v;
  // Training logs.
  std::vector<Instance> small;
  for (std::uint64_t s = 0; s < 6; ++s) small.push_back(generate_instance(fixtures::tiny_config(s, 3, 12)).instance);
  TrainConfig cfg;
  cfg.net = NetConfig{8, 2, 8};
  cfg.episodes = 12;
  auto triples = make_training_triples(small, 0.3, 5);
  auto a = train_dqn(triples, cfg, SelectionPolicy::tv(), 3);
  auto b = train_dqn(triples, cfg, SelectionPolicy::tv(), 3);
  v.require(a.log.to_text() == b.log.to_text(), "DQN logs differ");
  std::vector<std::shared_ptr<const Instance>> ptrs;
  for (const auto& q : small) ptrs.push_back(std::make_shared<const Instance>(q));
  SelectorTrainConfig scfg;
  scfg.net = NetConfig{8, 2, 8};
  scfg.epochs = 3;
  auto ccpm = OrderingPolicy::ccpm();
  auto mct = SelectionPolicy::mct();
  auto sa = train_selector(ptrs, ccpm, mct, scfg, 4);
  auto sb = train_selector(ptrs, ccpm, mct, scfg, 4);
  v.require(sa.log.to_text() == sb.log.to_text(), "selector logs differ");

  // Serialized files and bench reports.
  const fs::path dir = fs::temp_directory_path() / "isched_acceptance";
  fs::create_directories(dir);
  std::vector<std::string> files;
  for (std::size_t i = 0; i < small.size(); ++i) {
    RipRecord rec;
    rec.instance = small[i];
    rec.prior = triples[i].prior;
    rec.delta = generate_delta(small[i], 0.2, i);
    rec.meta.bound = lower_bound(small[i]).opt;
    const fs::path p1 = dir / ("a" + std::to_string(i) + ".json"), p2 = dir / ("b" + std::to_string(i) + ".json");
    save_instance(p1.string(), rec);
    save_instance(p2.string(), rec);
    v.require(slurp(p1) == slurp(p2), "saved files differ");
    files.push_back(p1.string());
  }
  BenchConfig bc;
  bc.files = files;
  bc.methods = {{"rl", "learned"}, {"rand", "rand"}, {"ccpm", "tv"}};
  bc.qnet = std::make_shared<const QNetworkParams>(a.params);
  bc.selector = std::make_shared<const SelectorParams>(sa.params);
  bc.seed = 9;
  auto r1 = run_bench(bc);
  auto r2 = run_bench(bc);
  v.require(r1.to_csv(false) == r2.to_csv(false), "bench reports differ");
  v.require(r1.summary_json(false) == r2.summary_json(false), "bench summaries differ");

  // load(save(x)) == x.
  std::size_t identical = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    GenConfig g = fixtures::tiny_config(seed, 1 + seed % 9, 40);
    g.num_resources = 1 + seed % 3;
    auto gen = generate_instance(g);
    RipRecord rec;
    rec.instance = gen.instance;
    if (seed % 2) rec.prior = gen.witness;
    if (seed % 3 == 0) rec.delta = generate_delta(gen.instance, 0.1, seed);
    rec.meta.bound = lower_bound(gen.instance).opt;
    const std::string text = serialize_instance(rec);
    auto back = parse_instance(text).record;
    if (back.instance == rec.instance && back.prior == rec.prior && back.delta == rec.delta &&
        back.meta.bound == rec.meta.bound && serialize_instance(back) == text) {
      ++identical;
    }
  }
  v.require(identical == 1000, "round-trip mismatch");
  v.detail << "logs, files and reports reproduce; " << identical << "/1000 round-trips exact";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"oracle optimality envelope", criterion1},  {"order sensitivity", criterion2},
      {"selector mechanism", criterion3},          {"gradient correctness", criterion4},
      {"DQN improvement", criterion5},             {"selector improvement", criterion6},
      {"reconfiguration semantics", criterion7},   {"scale generalization", criterion8},
      {"determinism and round-trips", criterion9},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    if (!v.pass) ++failures;
    std::printf("%s %zu %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.text().c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
