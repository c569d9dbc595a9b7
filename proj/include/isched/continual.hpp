#ifndef ISCHED_CONTINUAL_HPP_
#define ISCHED_CONTINUAL_HPP_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "isched/episode.hpp"

namespace isched {

struct ReconfigInit {
  /// Graph of q′. Unaffected processes are marked scheduled with order
  /// code 0; affected ones form the candidate set.
  ProcessGraph graph;
  UsageProfile rpu;  // usage of the reused starts under q′
  std::vector<ProcessId> candidates;
  std::map<std::string, Time> reused;
};

/// A process of q′ is affected iff one of its tasks is new, has changed
/// (d, e, l, r), has a different set of incident precedence pairs, has a
/// prior start that breaks a q′ window or internal precedence, or if its
/// membership differs from the q process holding the same tasks.
/// Throws ConstraintError when `prior` is infeasible for q.
ReconfigInit initialize_reconfig(const Instance& q, const Schedule& prior, const Instance& q2);

/// The iterative loop over the affected processes only; unaffected tasks
/// keep their prior starts.
RunResult continual_solve(const Instance& q, const Schedule& prior, const Instance& q2, OrderingPolicy& policy,
                          SelectionPolicy& selector, SolveOptions options = {});

/// Cold start on q′, discarding the prior schedule.
RunResult classical_solve(const Instance& q2, OrderingPolicy& policy, SelectionPolicy& selector,
                          SolveOptions options = {});

/// Episode positioned after initialize_reconfig, for callers that drive the
/// loop themselves.
Episode reconfig_episode(const Instance& q, const Schedule& prior, std::shared_ptr<const Instance> q2,
                         SolveOptions options = {});

}  // namespace isched

#endif  // ISCHED_CONTINUAL_HPP_
