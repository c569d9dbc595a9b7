#ifndef ISCHED_EPISODE_HPP_
#define ISCHED_EPISODE_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "isched/ordering.hpp"
#include "isched/selection.hpp"
#include "isched/subproblem.hpp"

namespace isched {

struct SolveOptions {
  std::size_t pool_size = kDefaultPoolSize;
  std::uint64_t seed = 0;
  ExactOptions exact;
};

struct IterationRecord {
  int iteration = 0;
  ProcessId process = 0;
  std::size_t tasks = 0;
  std::size_t candidates = 0;
  std::size_t chosen = 0;
  Rational chosen_objective;
  bool proven_optimal = true;
  double solve_seconds = 0.0;
  double select_seconds = 0.0;
};

struct EpisodeTrace {
  std::vector<ProcessId> order;  // π
  std::vector<IterationRecord> iterations;
  std::size_t subproblem_solves = 0;
  double seconds = 0.0;
};

/// Mutable state of one run of the iterative loop. The RPU always equals the
/// usage of the committed starts.
class Episode {
 public:
  Episode(std::shared_ptr<const Instance> inst, ProcessGraph graph, UsageProfile rpu,
          std::map<std::string, Time> fixed_starts, SolveOptions options);

  /// Every process unscheduled, empty RPU.
  static Episode cold_start(std::shared_ptr<const Instance> inst, SolveOptions options = {});

  const Instance& instance() const { return *inst_; }
  const std::shared_ptr<const Instance>& instance_ptr() const { return inst_; }
  const ProcessGraph& graph() const { return graph_; }
  const UsageProfile& rpu() const { return rpu_; }
  const SolveOptions& options() const { return options_; }
  const EpisodeTrace& trace() const { return trace_; }

  /// Iteration index the next commit receives (1 for the first one).
  int next_iteration() const { return next_iteration_; }
  bool done() const { return graph_.candidates().empty(); }

  GraphState state() const { return encode_state(graph_, next_iteration_); }
  SubproblemSpec subproblem(ProcessId v) const { return construct_subproblem(graph_, v, rpu_, *inst_); }
  std::vector<CandidateSolution> solve(const SubproblemSpec& spec, SolveStats* stats = nullptr);
  void commit(const SubproblemSpec& spec, const CandidateSolution& cand);

  /// Select a candidate for process v with `selector` and commit it.
  std::size_t step(ProcessId v, SelectionPolicy& selector);

  /// Committed starts so far (complete once done()).
  Schedule schedule() const;
  /// Objective of the finished schedule, verified with check_schedule.
  Rational objective() const;

 private:
  std::shared_ptr<const Instance> inst_;
  ProcessGraph graph_;
  UsageProfile rpu_;
  std::map<std::string, Time> starts_;
  SolveOptions options_;
  EpisodeTrace trace_;
  int next_iteration_ = 1;
};

struct RunResult {
  Schedule schedule;
  Rational objective;
  EpisodeTrace trace;
};

/// Runs the loop to completion: select process → construct → solve →
/// select candidate → commit.
RunResult run_episode(Episode& episode, OrderingPolicy& policy, SelectionPolicy& selector);

/// Cold-start solve of `inst`.
RunResult run_with_order(const Instance& inst, OrderingPolicy& policy, SelectionPolicy& selector,
                         SolveOptions options = {});

/// Cold-start solve with a prescribed process order (a permutation of all ids).
RunResult run_fixed_order(const Instance& inst, const std::vector<ProcessId>& order, SelectionPolicy& selector,
                          SolveOptions options = {});

}  // namespace isched

#endif  // ISCHED_EPISODE_HPP_
