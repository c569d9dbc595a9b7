#ifndef ISCHED_DECOMPOSITION_HPP_
#define ISCHED_DECOMPOSITION_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isched/model.hpp"

namespace isched {

using ProcessId = std::size_t;

/// One weakly connected component of the task DAG.
struct Process {
  ProcessId id = 0;
  std::vector<TaskIndex> tasks;  // ascending, i.e. ascending task id
  Time earliest_start = 0;       // ES = min e_i over members
  Time latest_finish = 0;        // LF = max l_i over members
  /// Union of the members' closed windows [e_i, l_i], merged and sorted.
  std::vector<std::pair<Time, Time>> windows;
  /// Resource kinds with strictly positive demand by some member.
  std::vector<bool> uses_resource;
  /// Iteration at which the process was committed; nullopt while unscheduled.
  std::optional<int> scheduled_iteration;

  bool scheduled() const { return scheduled_iteration.has_value(); }
};

constexpr std::size_t kNodeFeatureDim = 4;
constexpr std::size_t kEdgeFeatureDim = 7;
using NodeFeatures = std::array<double, kNodeFeatureDim>;
using EdgeFeatures = std::array<double, kEdgeFeatureDim>;

/// Undirected edge between processes a < b. `features` is oriented a→b; the
/// b→a view swaps the two per-process utilisation entries.
struct ProcessEdge {
  ProcessId a = 0;
  ProcessId b = 0;
  EdgeFeatures features{};
};

/// Process-level interaction graph together with the feature snapshot it was
/// built against. The graph is rebuilt after each commit, never patched.
struct ProcessGraph {
  std::vector<Process> processes;
  std::vector<NodeFeatures> node_features;
  std::vector<ProcessEdge> edges;
  /// adjacency[i] = (neighbor, edge index) pairs, neighbors ascending.
  std::vector<std::vector<std::pair<ProcessId, std::size_t>>> adjacency;
  /// Capacities R_k used for the utilisation features.
  std::vector<Units> caps;

  std::size_t size() const { return processes.size(); }
  /// Unscheduled process ids, ascending.
  std::vector<ProcessId> candidates() const;
  bool is_candidate(ProcessId id) const {
    return id < processes.size() && !processes[id].scheduled();
  }
  /// Features of the edge as seen from `from` towards its other endpoint.
  EdgeFeatures oriented_features(std::size_t edge, ProcessId from) const;
};

/// Partition into weakly connected components, ordered by smallest member id.
std::vector<Process> decompose_processes(const Instance& inst);

/// True iff some member windows of the two processes intersect (closed
/// intervals, touching endpoints count).
bool windows_overlap(const Process& pi, const Process& pj);

/// WRU over [from, to] (inclusive): (1/Σc) Σ_k (c_k/R_k) Σ_t u_k(t), with a
/// zero term wherever R_k = 0.
double weighted_resource_usage(const Instance& inst, const UsageProfile& rpu,
                               const std::vector<Units>& caps, Time from, Time to);

/// [PT, WRD, order code, WRU(ES, LF)]. Throws when Σ_k c_k = 0.
NodeFeatures node_features(const Process& proc, const Instance& inst, const UsageProfile& rpu,
                           const std::vector<Units>& caps);

/// [t_start, t_end, shared-resource ratio, WRU_i, WRU_j, WRU_i + WRU_j,
/// normalised system-wide usage]. Throws for a non-overlapping pair.
EdgeFeatures edge_features(const Process& pi, const Process& pj, const Instance& inst,
                           const UsageProfile& rpu, const std::vector<Units>& caps);

ProcessGraph build_process_graph(const Instance& inst, std::vector<Process> procs,
                                 const UsageProfile& rpu, const std::vector<Units>& caps);

/// Rebuilds every feature against `rpu` with caps = current peaks of `rpu`.
ProcessGraph refresh_features(const ProcessGraph& graph, const Instance& inst,
                              const UsageProfile& rpu);

/// Plain-text listing, one node or edge per line.
std::string dump_process_graph(const ProcessGraph& graph, const Instance& inst);

}  // namespace isched

#endif  // ISCHED_DECOMPOSITION_HPP_
