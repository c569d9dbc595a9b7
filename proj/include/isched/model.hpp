#ifndef ISCHED_MODEL_HPP_
#define ISCHED_MODEL_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isched/rational.hpp"
#include "isched/usage_profile.hpp"

namespace isched {

/// A non-preemptive task. It occupies [S, S + duration) and must satisfy
/// earliest_start <= S <= deadline - duration.
struct Task {
  std::string id;
  Time duration = 1;
  Time earliest_start = 0;
  Time deadline = 1;
  std::vector<Units> demands;  // one entry per resource kind

  Time latest_start() const { return deadline - duration; }

  friend bool operator==(const Task&, const Task&) = default;
};

struct ResourceKind {
  std::string id;
  Rational unit_cost;

  friend bool operator==(const ResourceKind&, const ResourceKind&) = default;
};

/// `pred` must finish before `succ` starts.
struct Precedence {
  std::string pred;
  std::string succ;

  friend auto operator<=>(const Precedence&, const Precedence&) = default;
  friend bool operator==(const Precedence&, const Precedence&) = default;
};

using TaskIndex = std::size_t;

/// A resource investment problem. Tasks are kept sorted by id and precedence
/// pairs sorted and de-duplicated, so two instances holding the same data
/// compare equal regardless of construction order. Construction never
/// fails; use validate_instance() to check the model invariants.
class Instance {
 public:
  Instance() = default;
  Instance(std::vector<Task> tasks, std::vector<ResourceKind> resources,
           std::vector<Precedence> precedence);

  const std::vector<Task>& tasks() const { return tasks_; }
  const std::vector<ResourceKind>& resources() const { return resources_; }
  const std::vector<Precedence>& precedence() const { return precedence_; }

  std::size_t num_tasks() const { return tasks_.size(); }
  std::size_t num_resources() const { return resources_.size(); }
  const Task& task(TaskIndex i) const { return tasks_[i]; }

  std::optional<TaskIndex> find(std::string_view id) const;
  /// Throws isched::Error for an unknown id.
  TaskIndex index_of(std::string_view id) const;

  /// Precedence pairs whose endpoints both exist, as task indices.
  const std::vector<std::pair<TaskIndex, TaskIndex>>& edges() const { return edges_; }
  const std::vector<std::vector<TaskIndex>>& successors() const { return successors_; }
  const std::vector<std::vector<TaskIndex>>& predecessors() const { return predecessors_; }

  /// Horizon [min_i e_i, max_i l_i]; empty instances have span 0.
  Time horizon_begin() const { return horizon_begin_; }
  Time horizon_end() const { return horizon_end_; }
  Time horizon_span() const { return horizon_end_ - horizon_begin_; }

  /// Costs as doubles, and their sum, for feature computation.
  std::vector<double> cost_vector() const;
  double total_cost() const;

  UsageProfile empty_profile() const;

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.tasks_ == b.tasks_ && a.resources_ == b.resources_ && a.precedence_ == b.precedence_;
  }

 private:
  std::vector<Task> tasks_;
  std::vector<ResourceKind> resources_;
  std::vector<Precedence> precedence_;

  std::map<std::string, TaskIndex, std::less<>> index_;
  std::vector<std::pair<TaskIndex, TaskIndex>> edges_;
  std::vector<std::vector<TaskIndex>> successors_;
  std::vector<std::vector<TaskIndex>> predecessors_;
  Time horizon_begin_ = 0;
  Time horizon_end_ = 0;
};

/// Start-time assignment, possibly partial. Provisioned capacities and the
/// objective are derived (see provisioned_capacities / objective_cost).
struct Schedule {
  std::map<std::string, Time> starts;

  bool contains(std::string_view id) const { return starts.find(std::string(id)) != starts.end(); }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  kDuplicateTaskId,
  kDuplicateResourceId,
  kUnknownTask,
  kSelfLoop,
  kCycle,
  kNonPositiveDuration,
  kNegativeEarliestStart,
  kWindowTooSmall,
  kDemandArity,
  kNegativeDemand,
  kNegativeCost,
};

struct Violation {
  ViolationKind kind;
  std::string subject;  // offending task / resource id
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
  std::vector<std::string> messages() const;
};

ValidationReport validate_instance(const Instance& inst);

// ---------------------------------------------------------------------------
// Schedules

struct FeasibilityReport {
  bool feasible = true;
  std::vector<std::string> diagnostics;
};

/// Checks precedence, windows and nonnegative capacities. Throws
/// ConstraintError("missing assignments") when a task has no start.
FeasibilityReport check_schedule(const Instance& inst, const Schedule& sched);

/// R_k = max_t Σ_{i active at t} r_{i,k}; does not require feasibility.
std::vector<Units> provisioned_capacities(const Instance& inst, const Schedule& sched);

/// Σ_k c_k R_k. Throws ConstraintError with check_schedule's diagnostics for
/// an infeasible schedule.
Rational objective_cost(const Instance& inst, const Schedule& sched);

/// Usage of the assigned tasks; unassigned tasks contribute nothing. Throws
/// ConstraintError when an assigned start lies outside its task window.
UsageProfile build_usage_profile(const Instance& inst, const Schedule& partial);

/// Index-based form used by the solver internals: starts[i] for each task.
Schedule make_schedule(const Instance& inst, const std::vector<std::optional<Time>>& starts);

// ---------------------------------------------------------------------------
// Bounds

struct LowerBound {
  std::vector<Units> per_resource;
  Rational opt;
};

/// max(energy bound, compulsory-part bound) per resource.
LowerBound lower_bound(const Instance& inst);

// ---------------------------------------------------------------------------
// Reconfiguration

struct ReconfigDelta {
  std::map<std::string, Task> modified;  // keyed by task id; value keeps the id
  std::vector<Task> added;
  std::vector<std::string> removed;
  std::vector<Precedence> added_precedence;
  std::vector<Precedence> removed_precedence;

  bool empty() const {
    return modified.empty() && added.empty() && removed.empty() && added_precedence.empty() &&
           removed_precedence.empty();
  }

  friend bool operator==(const ReconfigDelta&, const ReconfigDelta&) = default;
};

/// Returns the updated instance. Throws isched::Error for dangling ids and
/// ConstraintError when the result violates the instance invariants.
Instance apply_delta(const Instance& inst, const ReconfigDelta& delta);

}  // namespace isched

#endif  // ISCHED_MODEL_HPP_
