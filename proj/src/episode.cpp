#include "isched/episode.hpp"

#include <chrono>

#include "isched/error.hpp"

namespace isched {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

Episode::Episode(std::shared_ptr<const Instance> inst, ProcessGraph graph, UsageProfile rpu,
                 std::map<std::string, Time> fixed_starts, SolveOptions options)
    : inst_(std::move(inst)),
      graph_(std::move(graph)),
      rpu_(std::move(rpu)),
      starts_(std::move(fixed_starts)),
      options_(options) {
  if (!inst_) throw Error("episode needs an instance");
  for (const auto& p : graph_.processes) {
    if (p.scheduled_iteration && *p.scheduled_iteration >= next_iteration_) next_iteration_ = *p.scheduled_iteration + 1;
  }
}

Episode Episode::cold_start(std::shared_ptr<const Instance> inst, SolveOptions options) {
  if (!inst) throw Error("episode needs an instance");
  UsageProfile rpu = inst->empty_profile();
  ProcessGraph graph = build_process_graph(*inst, decompose_processes(*inst), rpu, rpu.peaks());
  return Episode(std::move(inst), std::move(graph), std::move(rpu), {}, options);
}

std::vector<CandidateSolution> Episode::solve(const SubproblemSpec& spec, SolveStats* stats) {
  ++trace_.subproblem_solves;
  const std::uint64_t seed = options_.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(next_iteration_));
  if (spec.tasks.size() <= kExactThreshold) {
    SolveStats local;
    auto out = solve_exact(spec, options_.pool_size, options_.exact, &local);
    if (stats) *stats = local;
    if (!out.empty()) return out;
  }
  if (stats) stats->proven_optimal = false;
  return solve_heuristic(spec, options_.pool_size, seed);
}

void Episode::commit(const SubproblemSpec& spec, const CandidateSolution& cand) {
  auto result = isched::commit(rpu_, cand, graph_, spec.process, next_iteration_, *inst_);
  rpu_ = std::move(result.rpu);
  graph_ = std::move(result.graph);
  for (std::size_t i = 0; i < spec.tasks.size(); ++i) starts_[spec.tasks[i].id] = cand.starts[i];
  trace_.order.push_back(spec.process);
  ++next_iteration_;
}

std::size_t Episode::step(ProcessId v, SelectionPolicy& selector) {
  IterationRecord rec;
  rec.iteration = next_iteration_;
  rec.process = v;
  auto t0 = Clock::now();
  SubproblemSpec spec = subproblem(v);
  SolveStats stats;
  auto cands = solve(spec, &stats);
  rec.solve_seconds = seconds_since(t0);
  auto t1 = Clock::now();
  std::size_t chosen = selector.select(cands, spec, state(), graph_, *inst_);
  rec.select_seconds = seconds_since(t1);
  rec.tasks = spec.tasks.size();
  rec.candidates = cands.size();
  rec.chosen = chosen;
  rec.chosen_objective = cands[chosen].objective;
  rec.proven_optimal = stats.proven_optimal;
  commit(spec, cands[chosen]);
  trace_.iterations.push_back(rec);
  return chosen;
}

Schedule Episode::schedule() const {
  Schedule s;
  s.starts = starts_;
  return s;
}

Rational Episode::objective() const {
  if (!done()) throw Error("episode still has unscheduled processes");
  return objective_cost(*inst_, schedule());
}

RunResult run_episode(Episode& episode, OrderingPolicy& policy, SelectionPolicy& selector) {
  auto t0 = Clock::now();
  while (!episode.done()) {
    ProcessId v = policy.select_next(episode.graph(), episode.instance(), episode.rpu(), episode.next_iteration());
    episode.step(v, selector);
  }
  RunResult out;
  out.schedule = episode.schedule();
  out.objective = episode.objective();
  out.trace = episode.trace();
  out.trace.seconds = seconds_since(t0);
  return out;
}

RunResult run_with_order(const Instance& inst, OrderingPolicy& policy, SelectionPolicy& selector,
                         SolveOptions options) {
  Episode ep = Episode::cold_start(std::make_shared<const Instance>(inst), options);
  return run_episode(ep, policy, selector);
}

RunResult run_fixed_order(const Instance& inst, const std::vector<ProcessId>& order, SelectionPolicy& selector,
                          SolveOptions options) {
  auto t0 = Clock::now();
  Episode ep = Episode::cold_start(std::make_shared<const Instance>(inst), options);
  if (order.size() != ep.graph().size()) throw Error("order is not a permutation of the processes");
  for (ProcessId v : order) ep.step(v, selector);
  RunResult out;
  out.schedule = ep.schedule();
  out.objective = ep.objective();
  out.trace = ep.trace();
  out.trace.seconds = seconds_since(t0);
  return out;
}

}  // namespace isched
