#ifndef ISCHED_SUBPROBLEM_HPP_
#define ISCHED_SUBPROBLEM_HPP_

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "isched/decomposition.hpp"
#include "isched/model.hpp"

namespace isched {

/// RIP restricted to one process. Previously committed tasks enter only via
/// the background usage snapshot.
struct SubproblemSpec {
  ProcessId process = 0;
  std::vector<TaskIndex> task_indices;  // global indices, ascending
  std::vector<Task> tasks;              // parallel to task_indices
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // local indices
  UsageProfile background;
  std::vector<ResourceKind> resources;
  Time window_begin = 0;  // ES of the process
  Time window_end = 0;    // LF of the process
};

/// One local schedule for a subproblem.
struct CandidateSolution {
  std::vector<Time> starts;   // parallel to SubproblemSpec::tasks
  UsageProfile local;         // incremental usage of the process alone
  std::vector<Units> caps;    // R_k^(v) = max_t (u_k(t) + local_k(t))
  Rational objective;         // Σ_k c_k R_k^(v)
};

/// Processes larger than this are handed to the heuristic generator.
constexpr std::size_t kExactThreshold = 12;
constexpr std::size_t kDefaultPoolSize = 2;

struct SolveStats {
  std::size_t nodes = 0;
  bool proven_optimal = true;
};

struct ExactOptions {
  /// Search nodes before the branch-and-bound gives up proving optimality
  /// and returns its incumbents.
  std::size_t node_limit = 2'000'000;
};

SubproblemSpec construct_subproblem(const ProcessGraph& graph, ProcessId v, const UsageProfile& rpu,
                                    const Instance& inst);

/// Builds the candidate for given local starts. Throws ConstraintError if the
/// starts violate a window or an internal precedence relation.
CandidateSolution make_candidate(const SubproblemSpec& spec, std::vector<Time> starts);

/// Branch-and-bound over start times, tasks branched in id order and start
/// values ascending. Returns up to m distinct candidates sorted by objective,
/// ties broken by the lexicographically smallest start vector; the first
/// one is optimal unless the node limit was hit (reported in `stats`).
std::vector<CandidateSolution> solve_exact(const SubproblemSpec& spec, std::size_t m,
                                           ExactOptions options = {}, SolveStats* stats = nullptr);

/// Serial schedule-generation scheme run under several priority rules
/// (min-slack, max-demand, seeded random keys). Every task goes to the
/// window- and precedence-feasible start with the smallest resulting peak
/// cost. Returns up to m distinct candidates, best first.
std::vector<CandidateSolution> solve_heuristic(const SubproblemSpec& spec, std::size_t m,
                                               std::uint64_t seed);

/// solve_exact below kExactThreshold tasks (falling back to the heuristic
/// if the node limit leaves it without any incumbent), heuristic above.
std::vector<CandidateSolution> solve_subproblem(const SubproblemSpec& spec, std::size_t m,
                                                std::uint64_t seed, SolveStats* stats = nullptr);

struct CommitResult {
  UsageProfile rpu;
  ProcessGraph graph;
};

/// Adds the candidate's usage to the pool, marks v scheduled at `iteration`
/// and rebuilds every feature with caps = peaks of the updated usage.
CommitResult commit(const UsageProfile& rpu, const CandidateSolution& cand, const ProcessGraph& graph,
                    ProcessId v, int iteration, const Instance& inst);

}  // namespace isched

#endif  // ISCHED_SUBPROBLEM_HPP_
