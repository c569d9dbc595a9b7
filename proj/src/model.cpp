#include "isched/model.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "isched/error.hpp"

namespace isched {

// ---------------------------------------------------------------------------
// Instance

Instance::Instance(std::vector<Task> tasks, std::vector<ResourceKind> resources,
                   std::vector<Precedence> precedence)
    : tasks_(std::move(tasks)), resources_(std::move(resources)), precedence_(std::move(precedence)) {
  std::stable_sort(tasks_.begin(), tasks_.end(),
                   [](const Task& a, const Task& b) { return a.id < b.id; });
  std::sort(precedence_.begin(), precedence_.end());
  precedence_.erase(std::unique(precedence_.begin(), precedence_.end()), precedence_.end());

  for (TaskIndex i = 0; i < tasks_.size(); ++i) index_.emplace(tasks_[i].id, i);

  successors_.assign(tasks_.size(), {});
  predecessors_.assign(tasks_.size(), {});
  for (const auto& p : precedence_) {
    auto a = find(p.pred);
    auto b = find(p.succ);
    if (!a || !b) continue;
    edges_.emplace_back(*a, *b);
    successors_[*a].push_back(*b);
    predecessors_[*b].push_back(*a);
  }

  if (!tasks_.empty()) {
    horizon_begin_ = tasks_.front().earliest_start;
    horizon_end_ = tasks_.front().deadline;
    for (const auto& t : tasks_) {
      horizon_begin_ = std::min(horizon_begin_, t.earliest_start);
      horizon_end_ = std::max(horizon_end_, t.deadline);
    }
    horizon_end_ = std::max(horizon_end_, horizon_begin_);
  }
}

std::optional<TaskIndex> Instance::find(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TaskIndex Instance::index_of(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw Error("unknown task '" + std::string(id) + "'");
  return *idx;
}

std::vector<double> Instance::cost_vector() const {
  std::vector<double> out;
  out.reserve(resources_.size());
  for (const auto& r : resources_) out.push_back(r.unit_cost.to_double());
  return out;
}

double Instance::total_cost() const {
  double sum = 0.0;
  for (const auto& r : resources_) sum += r.unit_cost.to_double();
  return sum;
}

UsageProfile Instance::empty_profile() const {
  return UsageProfile(resources_.size(), horizon_begin_, horizon_span());
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

std::vector<std::string> ValidationReport::messages() const {
  std::vector<std::string> out;
  out.reserve(violations.size());
  for (const auto& v : violations) out.push_back(v.message);
  return out;
}

namespace {

// Returns one directed cycle as a closed walk (first == last), or empty.
std::vector<TaskIndex> find_cycle(const Instance& inst) {
  const std::size_t n = inst.num_tasks();
  std::vector<std::size_t> indegree(n, 0);
  for (auto [a, b] : inst.edges()) {
    if (a != b) ++indegree[b];
  }
  std::deque<TaskIndex> ready;
  for (TaskIndex i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  std::vector<bool> removed(n, false);
  while (!ready.empty()) {
    TaskIndex i = ready.front();
    ready.pop_front();
    removed[i] = true;
    for (TaskIndex j : inst.successors()[i]) {
      if (j != i && --indegree[j] == 0) ready.push_back(j);
    }
  }
  auto start = std::find(removed.begin(), removed.end(), false);
  if (start == removed.end()) return {};

  // Every remaining node has a remaining predecessor; walk backwards until a
  // node repeats.
  std::vector<std::size_t> seen_at(n, n);
  std::vector<TaskIndex> walk;
  TaskIndex cur = static_cast<TaskIndex>(start - removed.begin());
  while (seen_at[cur] == n) {
    seen_at[cur] = walk.size();
    walk.push_back(cur);
    for (TaskIndex p : inst.predecessors()[cur]) {
      if (!removed[p] && p != cur) {
        cur = p;
        break;
      }
    }
  }
  std::vector<TaskIndex> cycle(walk.begin() + static_cast<std::ptrdiff_t>(seen_at[cur]), walk.end());
  std::reverse(cycle.begin(), cycle.end());
  auto smallest = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), smallest, cycle.end());
  cycle.push_back(cycle.front());
  return cycle;
}

}  // namespace

ValidationReport validate_instance(const Instance& inst) {
  ValidationReport report;
  auto add = [&report](ViolationKind kind, const std::string& subject, std::string message) {
    report.violations.push_back({kind, subject, std::move(message)});
  };

  const auto& tasks = inst.tasks();
  for (std::size_t i = 1; i < tasks.size(); ++i) {
    if (tasks[i].id == tasks[i - 1].id) add(ViolationKind::kDuplicateTaskId, tasks[i].id, "duplicate task id " + tasks[i].id);
  }
  std::set<std::string> resource_ids;
  for (const auto& r : inst.resources()) {
    if (!resource_ids.insert(r.id).second) add(ViolationKind::kDuplicateResourceId, r.id, "duplicate resource id " + r.id);
    if (r.unit_cost < Rational(0)) add(ViolationKind::kNegativeCost, r.id, "negative unit cost for " + r.id);
  }

  for (const auto& p : inst.precedence()) {
    bool known = true;
    for (const auto* id : {&p.pred, &p.succ}) {
      if (!inst.find(*id)) {
        add(ViolationKind::kUnknownTask, *id, "precedence " + p.pred + "→" + p.succ + " references unknown task " + *id);
        known = false;
      }
    }
    if (known && p.pred == p.succ) add(ViolationKind::kSelfLoop, p.pred, "self-loop on " + p.pred);
  }

  if (auto cycle = find_cycle(inst); !cycle.empty()) {
    std::string text = "cycle ";
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      if (i > 0) text += "→";
      text += tasks[cycle[i]].id;
    }
    add(ViolationKind::kCycle, tasks[cycle.front()].id, text);
  }

  for (const auto& t : tasks) {
    if (t.duration < 1) add(ViolationKind::kNonPositiveDuration, t.id, "duration of " + t.id + " must be at least 1");
    if (t.earliest_start < 0) add(ViolationKind::kNegativeEarliestStart, t.id, "negative earliest start for " + t.id);
    if (t.earliest_start + t.duration > t.deadline) add(ViolationKind::kWindowTooSmall, t.id, "window too small for " + t.id);
    if (t.demands.size() != inst.num_resources()) {
      add(ViolationKind::kDemandArity, t.id,
          "task " + t.id + " has " + std::to_string(t.demands.size()) + " demands for " +
              std::to_string(inst.num_resources()) + " resources");
    }
    for (Units r : t.demands) {
      if (r < 0) {
        add(ViolationKind::kNegativeDemand, t.id, "negative demand for " + t.id);
        break;
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Schedules

Schedule make_schedule(const Instance& inst, const std::vector<std::optional<Time>>& starts) {
  if (starts.size() != inst.num_tasks()) throw Error("start vector does not match task count");
  Schedule s;
  for (TaskIndex i = 0; i < starts.size(); ++i) {
    if (starts[i]) s.starts.emplace(inst.task(i).id, *starts[i]);
  }
  return s;
}

FeasibilityReport check_schedule(const Instance& inst, const Schedule& sched) {
  std::vector<std::string> missing;
  for (const auto& t : inst.tasks()) {
    if (!sched.starts.contains(t.id)) missing.push_back(t.id);
  }
  if (!missing.empty()) throw ConstraintError("missing assignments", missing);

  FeasibilityReport report;
  auto fail = [&report](std::string msg) {
    report.feasible = false;
    report.diagnostics.push_back(std::move(msg));
  };
  for (const auto& [id, start] : sched.starts) {
    if (!inst.find(id)) fail("unknown task " + id + " in schedule");
  }
  for (auto [a, b] : inst.edges()) {
    const Task& ta = inst.task(a);
    const Task& tb = inst.task(b);
    Time sa = sched.starts.at(ta.id);
    Time sb = sched.starts.at(tb.id);
    if (sa + ta.duration > sb) {
      fail("precedence " + ta.id + "→" + tb.id + " violated: " + std::to_string(sa) + "+" +
           std::to_string(ta.duration) + " > " + std::to_string(sb));
    }
  }
  for (const auto& t : inst.tasks()) {
    Time s = sched.starts.at(t.id);
    if (s < t.earliest_start || s > t.latest_start()) {
      fail("start of " + t.id + " (" + std::to_string(s) + ") outside window [" +
           std::to_string(t.earliest_start) + ", " + std::to_string(t.latest_start()) + "]");
    }
  }
  auto caps = provisioned_capacities(inst, sched);
  for (std::size_t k = 0; k < caps.size(); ++k) {
    if (caps[k] < 0) fail("negative capacity for resource " + inst.resources()[k].id);
  }
  return report;
}

std::vector<Units> provisioned_capacities(const Instance& inst, const Schedule& sched) {
  std::vector<Units> caps(inst.num_resources(), 0);
  for (std::size_t k = 0; k < inst.num_resources(); ++k) {
    // (time, delta); releases sort before acquisitions at equal time since
    // activity intervals are half-open.
    std::vector<std::pair<Time, Units>> events;
    for (const auto& [id, start] : sched.starts) {
      auto idx = inst.find(id);
      if (!idx) continue;
      const Task& t = inst.task(*idx);
      if (k >= t.demands.size() || t.demands[k] == 0) continue;
      events.emplace_back(start, t.demands[k]);
      events.emplace_back(start + t.duration, -t.demands[k]);
    }
    std::sort(events.begin(), events.end());
    Units running = 0;
    for (auto [time, delta] : events) {
      running += delta;
      caps[k] = std::max(caps[k], running);
    }
  }
  return caps;
}

Rational objective_cost(const Instance& inst, const Schedule& sched) {
  auto report = check_schedule(inst, sched);
  if (!report.feasible) throw ConstraintError("infeasible schedule", report.diagnostics);
  auto caps = provisioned_capacities(inst, sched);
  Rational total;
  for (std::size_t k = 0; k < caps.size(); ++k) total += inst.resources()[k].unit_cost * Rational(caps[k]);
  return total;
}

UsageProfile build_usage_profile(const Instance& inst, const Schedule& partial) {
  UsageProfile profile = inst.empty_profile();
  std::vector<std::string> bad;
  for (const auto& [id, start] : partial.starts) {
    auto idx = inst.find(id);
    if (!idx) {
      bad.push_back("unknown task " + id);
      continue;
    }
    const Task& t = inst.task(*idx);
    if (start < t.earliest_start || start > t.latest_start()) {
      bad.push_back("start of " + id + " (" + std::to_string(start) + ") outside window");
      continue;
    }
    profile.add(t, start);
  }
  if (!bad.empty()) throw ConstraintError("assigned start outside window", bad);
  return profile;
}

// ---------------------------------------------------------------------------
// Bounds

LowerBound lower_bound(const Instance& inst) {
  LowerBound lb;
  lb.per_resource.assign(inst.num_resources(), 0);
  const Time horizon = inst.horizon_span();
  const Time begin = inst.horizon_begin();
  for (std::size_t k = 0; k < inst.num_resources(); ++k) {
    Units energy = 0;
    for (const auto& t : inst.tasks()) energy += t.demands[k] * t.duration;
    Units energy_bound = horizon > 0 ? (energy + horizon - 1) / horizon : 0;

    // Compulsory part [l - d, e + d) of every task whose window is tighter
    // than twice its duration.
    std::vector<Units> diff(static_cast<std::size_t>(horizon) + 1, 0);
    for (const auto& t : inst.tasks()) {
      Time from = t.latest_start();
      Time to = t.earliest_start + t.duration;
      if (from >= to || t.demands[k] == 0) continue;
      diff[static_cast<std::size_t>(from - begin)] += t.demands[k];
      diff[static_cast<std::size_t>(to - begin)] -= t.demands[k];
    }
    Units running = 0;
    Units compulsory = 0;
    for (Time t = 0; t < horizon; ++t) {
      running += diff[static_cast<std::size_t>(t)];
      compulsory = std::max(compulsory, running);
    }
    lb.per_resource[k] = std::max(energy_bound, compulsory);
    lb.opt += inst.resources()[k].unit_cost * Rational(lb.per_resource[k]);
  }
  return lb;
}

// ---------------------------------------------------------------------------
// Reconfiguration

Instance apply_delta(const Instance& inst, const ReconfigDelta& delta) {
  std::map<std::string, Task> tasks;
  for (const auto& t : inst.tasks()) tasks.emplace(t.id, t);

  for (const auto& id : delta.removed) {
    if (tasks.erase(id) == 0) throw Error("delta removes unknown task '" + id + "'");
  }
  for (const auto& [id, replacement] : delta.modified) {
    auto it = tasks.find(id);
    if (it == tasks.end()) throw Error("delta modifies unknown task '" + id + "'");
    if (!replacement.id.empty() && replacement.id != id) {
      throw Error("delta entry for '" + id + "' carries id '" + replacement.id + "'");
    }
    it->second = replacement;
    it->second.id = id;
  }
  for (const auto& t : delta.added) {
    if (!tasks.emplace(t.id, t).second) throw Error("delta adds existing task '" + t.id + "'");
  }

  std::set<Precedence> precedence(inst.precedence().begin(), inst.precedence().end());
  for (const auto& p : delta.removed_precedence) {
    if (precedence.erase(p) == 0) throw Error("delta removes unknown precedence " + p.pred + "→" + p.succ);
  }
  for (const auto& p : delta.added_precedence) precedence.insert(p);

  std::vector<Task> task_list;
  task_list.reserve(tasks.size());
  for (auto& [id, t] : tasks) task_list.push_back(std::move(t));
  Instance updated(std::move(task_list), inst.resources(),
                   std::vector<Precedence>(precedence.begin(), precedence.end()));
  auto report = validate_instance(updated);
  if (!report.ok()) throw ConstraintError("delta produces an invalid instance", report.messages());
  return updated;
}

}  // namespace isched
