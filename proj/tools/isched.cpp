// Command-line front end: gen, validate, solve, reconfig, train-q,
// train-selector, bench.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isched/bench.hpp"
#include "isched/checkpoint.hpp"
#include "isched/continual.hpp"
#include "isched/dqn.hpp"
#include "isched/error.hpp"
#include "isched/generator.hpp"
#include "isched/ripfile.hpp"
#include "isched/selector_training.hpp"

namespace fs = std::filesystem;
using namespace isched;

namespace {

struct Shared {
  std::uint64_t seed = 0;
  std::string policy = "ccpm";
  std::string selector = "tv";
  std::size_t m = kDefaultPoolSize;
  std::optional<double> time_limit;
  std::string out;
  std::string qnet_path;
  std::string selector_path;
};

void add_shared(CLI::App* cmd, Shared& s) {
  cmd->add_option("--seed", s.seed, "random seed");
  cmd->add_option("--policy", s.policy, "process ordering")
      ->check(CLI::IsMember({"rl", "ccpm", "mrrr", "dum", "rand"}));
  cmd->add_option("--selector", s.selector, "candidate selection")
      ->check(CLI::IsMember({"learned", "mad", "tv", "mct", "rand"}));
  cmd->add_option("--m", s.m, "candidate pool size")->check(CLI::PositiveNumber);
  cmd->add_option("--time-limit", s.time_limit, "time budget in seconds (default 0.1*|T|)");
  cmd->add_option("--out", s.out, "output path");
  cmd->add_option("--qnet", s.qnet_path, "Q-network checkpoint (for --policy rl)");
  cmd->add_option("--selector-ckpt", s.selector_path, "selector checkpoint (for --selector learned)");
}

std::shared_ptr<const QNetworkParams> maybe_qnet(const Shared& s) {
  if (s.qnet_path.empty()) {
    if (s.policy == "rl") throw Error("--policy rl needs --qnet");
    return nullptr;
  }
  return std::make_shared<const QNetworkParams>(load_qnet(s.qnet_path));
}

std::shared_ptr<const SelectorParams> maybe_selector(const Shared& s) {
  if (s.selector_path.empty()) {
    if (s.selector == "learned") throw Error("--selector learned needs --selector-ckpt");
    return nullptr;
  }
  return std::make_shared<const SelectorParams>(load_selector(s.selector_path));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::vector<std::string> expand(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.path().extension() == ".json") found.push_back(e.path().string());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(in);
    }
  }
  return files;
}

void print_result(const Instance& inst, const RunResult& r, double budget, double seconds) {
  std::cout << "objective " << r.objective << "\n";
  std::cout << "bound " << lower_bound(inst).opt << "\n";
  std::cout << "iterations " << r.trace.order.size() << "\n";
  std::cout << "order";
  for (auto v : r.trace.order) std::cout << " " << v;
  std::cout << "\n";
  std::printf("seconds %.6f budget %.6f%s\n", seconds, budget, seconds > budget ? " (over budget)" : "");
}

// ---------------------------------------------------------------------------

int cmd_gen(const GenConfig& base, const std::string& difficulty, std::size_t count, double delta,
            const Shared& s) {
  if (s.out.empty()) throw Error("gen needs --out");
  GenConfig cfg = base;
  if (!difficulty.empty()) {
    Difficulty d = difficulty == "easy"     ? Difficulty::kEasy
                   : difficulty == "normal" ? Difficulty::kNormal
                                            : Difficulty::kHard;
    cfg = difficulty_config(d, s.seed);
  }
  if (count > 1) fs::create_directories(s.out);
  for (std::size_t i = 0; i < count; ++i) {
    cfg.seed = s.seed + i;
    GeneratedInstance g = generate_instance(cfg);
    RipRecord rec;
    rec.instance = g.instance;
    auto order = OrderingPolicy::ccpm();
    auto sel = SelectionPolicy::mct();
    RunResult r = run_with_order(g.instance, order, sel);
    rec.prior = r.schedule;
    rec.meta.best_cost = r.objective;
    rec.meta.bound = lower_bound(g.instance).opt;
    rec.meta.producer = "isched gen (Task_start: ccpm+mct; Bound: analytic lower bound)";
    if (delta > 0.0) rec.delta = generate_delta(g.instance, delta, cfg.seed ^ 0x5bd1e995ULL);
    std::string path = s.out;
    if (count > 1) {
      char name[32];
      std::snprintf(name, sizeof(name), "inst_%04zu.json", i);
      path = (fs::path(s.out) / name).string();
    }
    save_instance(path, rec);
    std::cout << path << " tasks=" << g.instance.num_tasks() << " processes=" << cfg.processes
              << " class=" << difficulty_name(classify(cfg.processes, g.instance.num_tasks())) << "\n";
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot open " << path << "\n";
    return 1;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  LoadedRip loaded;
  try {
    loaded = parse_instance(buf.str());
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  }
  auto report = validate_instance(loaded.record.instance);
  if (!report.ok()) {
    std::cerr << "invalid instance:\n";
    for (const auto& m : report.messages()) std::cerr << "  " << m << "\n";
    return 2;
  }
  if (loaded.prior_check && !loaded.prior_check->feasible) {
    std::cerr << "Task_start is infeasible:\n";
    for (const auto& d : loaded.prior_check->diagnostics) std::cerr << "  " << d << "\n";
    return 3;
  }
  std::cout << "ok: " << loaded.record.instance.num_tasks() << " tasks, "
            << loaded.record.instance.num_resources() << " resources";
  if (loaded.prior_check) std::cout << ", Task_start feasible";
  std::cout << "\n";
  return 0;
}

int cmd_solve(const std::string& path, const Shared& s) {
  LoadedRip loaded = load_instance(path);
  const Instance& inst = loaded.record.instance;
  auto order = OrderingPolicy::from_name(s.policy, s.seed, maybe_qnet(s));
  auto sel = SelectionPolicy::from_name(s.selector, s.seed, maybe_selector(s));
  SolveOptions options;
  options.pool_size = s.m;
  options.seed = s.seed;
  auto t0 = std::chrono::steady_clock::now();
  RunResult r = classical_solve(inst, order, sel, options);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  print_result(inst, r, s.time_limit.value_or(0.1 * static_cast<double>(inst.num_tasks())), secs);
  if (!s.out.empty()) {
    RipRecord rec = loaded.record;
    rec.prior = r.schedule;
    rec.meta.best_cost = r.objective;
    rec.meta.bound = lower_bound(inst).opt;
    rec.meta.time.reset();
    rec.meta.producer = "isched solve " + s.policy + "+" + s.selector;
    save_instance(s.out, rec);
  }
  return 0;
}

int cmd_reconfig(const std::string& path, bool classical, const Shared& s) {
  LoadedRip loaded = load_instance(path);
  const RipRecord& rec = loaded.record;
  if (!rec.prior) throw Error(path + " has no Task_start to reconfigure from");
  if (!rec.delta) throw Error(path + " has no Modified_data");
  Instance updated = apply_delta(rec.instance, *rec.delta);
  auto order = OrderingPolicy::from_name(s.policy, s.seed, maybe_qnet(s));
  auto sel = SelectionPolicy::from_name(s.selector, s.seed, maybe_selector(s));
  SolveOptions options;
  options.pool_size = s.m;
  options.seed = s.seed;
  auto t0 = std::chrono::steady_clock::now();
  RunResult r = classical ? classical_solve(updated, order, sel, options)
                          : continual_solve(rec.instance, *rec.prior, updated, order, sel, options);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "mode " << (classical ? "classical" : "continual") << "\n";
  std::cout << "subproblem_solves " << r.trace.subproblem_solves << "\n";
  print_result(updated, r, s.time_limit.value_or(0.1 * static_cast<double>(updated.num_tasks())), secs);
  if (!s.out.empty()) {
    RipRecord outrec;
    outrec.instance = updated;
    outrec.prior = r.schedule;
    outrec.meta.best_cost = r.objective;
    outrec.meta.bound = lower_bound(updated).opt;
    outrec.meta.producer = std::string("isched reconfig ") + (classical ? "classical" : "continual");
    save_instance(s.out, outrec);
  }
  return 0;
}

int cmd_train_q(const std::vector<std::string>& inputs, TrainConfig cfg, double delta, const std::string& log_path,
                const Shared& s) {
  if (s.out.empty()) throw Error("train-q needs --out");
  std::vector<TrainingTriple> triples;
  std::vector<Instance> plain;
  for (const auto& f : expand(inputs)) {
    RipRecord rec = load_instance(f).record;
    if (rec.prior && rec.delta) {
      TrainingTriple t;
      t.original = std::make_shared<const Instance>(rec.instance);
      t.prior = *rec.prior;
      t.updated = std::make_shared<const Instance>(apply_delta(rec.instance, *rec.delta));
      triples.push_back(std::move(t));
    } else {
      plain.push_back(rec.instance);
    }
  }
  auto extra = make_training_triples(plain, delta, s.seed);
  triples.insert(triples.end(), extra.begin(), extra.end());
  cfg.pool_size = s.m;
  auto sel = SelectionPolicy::from_name(s.selector, s.seed, maybe_selector(s));
  DqnResult result = train_dqn(triples, cfg, sel, s.seed);
  save_qnet(s.out, result.params, s.seed, {{"selector", s.selector}, {"episodes", std::to_string(result.log.episodes.size())}});
  if (!log_path.empty()) write_text(log_path, result.log.to_text());
  std::cout << "trained on " << triples.size() << " triples, " << result.log.episodes.size() << " episodes -> " << s.out
            << "\n";
  return 0;
}

int cmd_train_selector(const std::vector<std::string>& inputs, SelectorTrainConfig cfg, const std::string& log_path,
                       const Shared& s) {
  if (s.out.empty()) throw Error("train-selector needs --out");
  std::vector<std::shared_ptr<const Instance>> instances;
  for (const auto& f : expand(inputs)) instances.push_back(std::make_shared<const Instance>(load_instance(f).record.instance));
  cfg.pool_size = s.m;
  SelectorResult result = train_selector(instances, OrderingPolicy::ccpm(), SelectionPolicy::mct(), cfg, s.seed);
  save_selector(s.out, result.params, s.seed, {{"baseline", "ccpm+mct"}, {"tuples", std::to_string(result.log.tuples)}});
  if (!log_path.empty()) write_text(log_path, result.log.to_text());
  std::cout << "trained on " << result.log.tuples << " tuples (" << result.log.skipped << " skipped) -> " << s.out
            << "\n";
  return 0;
}

int cmd_bench(const std::vector<std::string>& inputs, const std::vector<std::string>& methods,
              const std::string& summary, bool no_timing, unsigned threads, const Shared& s) {
  BenchConfig cfg;
  cfg.files = expand(inputs);
  for (const auto& m : methods) {
    auto plus = m.find('+');
    if (plus == std::string::npos) throw Error("method '" + m + "' must look like policy+selector");
    cfg.methods.push_back({m.substr(0, plus), m.substr(plus + 1)});
  }
  cfg.time_limit = s.time_limit;
  cfg.seed = s.seed;
  cfg.pool_size = s.m;
  if (!s.qnet_path.empty()) cfg.qnet = std::make_shared<const QNetworkParams>(load_qnet(s.qnet_path));
  if (!s.selector_path.empty()) cfg.selector = std::make_shared<const SelectorParams>(load_selector(s.selector_path));
  cfg.threads = threads;
  BenchReport report = run_bench(cfg);
  const std::string csv = report.to_csv(!no_timing);
  if (s.out.empty()) {
    std::cout << csv;
  } else {
    write_text(s.out, csv);
  }
  const std::string js = report.summary_json(!no_timing);
  if (!summary.empty()) {
    write_text(summary, js);
  } else {
    std::cerr << js;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iterative decomposition scheduler for the resource investment problem"};
  app.require_subcommand(1);
  Shared shared;

  auto* gen = app.add_subcommand("gen", "generate synthetic instances");
  GenConfig gen_cfg;
  std::string difficulty;
  std::size_t count = 1;
  double gen_delta = 0.05;
  gen->add_option("--processes", gen_cfg.processes, "number of processes");
  gen->add_option("--min-tasks", gen_cfg.min_tasks);
  gen->add_option("--max-tasks", gen_cfg.max_tasks);
  gen->add_option("--resources", gen_cfg.num_resources);
  gen->add_option("--density", gen_cfg.precedence_density);
  gen->add_option("--slack", gen_cfg.slack);
  gen->add_option("--slack-variation", gen_cfg.slack_variation, "per-process slack spread in [0, 1]");
  gen->add_option("--difficulty", difficulty)->check(CLI::IsMember({"easy", "normal", "hard"}));
  gen->add_option("--count", count, "number of instances (--out is then a directory)");
  gen->add_option("--delta", gen_delta, "fraction of tasks perturbed in Modified_data (0 for none)");
  add_shared(gen, shared);

  auto* val = app.add_subcommand("validate", "check an instance file");
  std::string path;
  val->add_option("file", path)->required();

  auto* solve = app.add_subcommand("solve", "classical solve from a cold start");
  solve->add_option("file", path)->required();
  add_shared(solve, shared);

  auto* reconfig = app.add_subcommand("reconfig", "re-solve after Modified_data");
  bool classical = false;
  reconfig->add_option("file", path)->required();
  reconfig->add_flag("--classical", classical, "ignore Task_start and solve from scratch");
  add_shared(reconfig, shared);

  auto* train_q = app.add_subcommand("train-q", "train the ordering Q-network");
  std::vector<std::string> inputs;
  TrainConfig train_cfg;
  double train_delta = 0.3;
  std::string log_path;
  train_q->add_option("inputs", inputs, "instance files or directories")->required();
  train_q->add_option("--episodes", train_cfg.episodes, "episode budget (0: one per triple)");
  train_q->add_option("--batch", train_cfg.batch_size);
  train_q->add_option("--lr", train_cfg.lr);
  train_q->add_option("--gamma", train_cfg.gamma);
  train_q->add_option("--epsilon", train_cfg.epsilon);
  train_q->add_option("--alpha", train_cfg.alpha);
  train_q->add_option("--target-sync", train_cfg.target_sync);
  train_q->add_option("--replay", train_cfg.replay_capacity);
  train_q->add_option("--threads", train_cfg.threads);
  train_q->add_option("--delta", train_delta, "delta fraction for files without Modified_data");
  train_q->add_option("--log", log_path, "training log path");
  add_shared(train_q, shared);

  auto* train_sel = app.add_subcommand("train-selector", "train the candidate ranking network");
  SelectorTrainConfig sel_cfg;
  train_sel->add_option("inputs", inputs, "instance files or directories")->required();
  train_sel->add_option("--epochs", sel_cfg.epochs);
  train_sel->add_option("--lr", sel_cfg.lr);
  train_sel->add_option("--threads", sel_cfg.threads);
  train_sel->add_option("--log", log_path, "training log path");
  add_shared(train_sel, shared);

  auto* bench = app.add_subcommand("bench", "run methods over a set of instances");
  std::vector<std::string> methods{"ccpm+tv", "rand+tv"};
  std::string summary;
  bool no_timing = false;
  unsigned threads = 1;
  bench->add_option("inputs", inputs, "instance files or directories")->required();
  bench->add_option("--methods", methods, "policy+selector pairs")->delimiter(',');
  bench->add_option("--summary", summary, "summary JSON path");
  bench->add_flag("--no-timing", no_timing, "blank the timing columns for byte-stable reports");
  bench->add_option("--threads", threads);
  add_shared(bench, shared);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_cfg, difficulty, count, gen_delta, shared);
    if (val->parsed()) return cmd_validate(path);
    if (solve->parsed()) return cmd_solve(path, shared);
    if (reconfig->parsed()) return cmd_reconfig(path, classical, shared);
    if (train_q->parsed()) return cmd_train_q(inputs, train_cfg, train_delta, log_path, shared);
    if (train_sel->parsed()) return cmd_train_selector(inputs, sel_cfg, log_path, shared);
    if (bench->parsed()) return cmd_bench(inputs, methods, summary, no_timing, threads, shared);
  } catch (const ConstraintError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& d : e.details()) std::cerr << "  " << d << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
