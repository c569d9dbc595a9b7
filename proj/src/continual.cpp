#include "isched/continual.hpp"

#include <set>

#include "isched/error.hpp"

namespace isched {

namespace {

using IdPairs = std::set<std::pair<std::string, std::string>>;

// Incident precedence pairs of every task, by id.
std::map<std::string, IdPairs> incident_pairs(const Instance& inst) {
  std::map<std::string, IdPairs> out;
  for (const auto& p : inst.precedence()) {
    out[p.pred].insert({p.pred, p.succ});
    out[p.succ].insert({p.pred, p.succ});
  }
  return out;
}

bool same_parameters(const Task& a, const Task& b) {
  return a.duration == b.duration && a.earliest_start == b.earliest_start && a.deadline == b.deadline &&
         a.demands == b.demands;
}

}  // namespace

ReconfigInit initialize_reconfig(const Instance& q, const Schedule& prior, const Instance& q2) {
  auto verdict = check_schedule(q, prior);
  if (!verdict.feasible) throw ConstraintError("prior schedule is infeasible for the original instance", verdict.diagnostics);

  // Membership of q's processes, keyed by task id.
  auto old_procs = decompose_processes(q);
  std::map<std::string, std::size_t> old_owner;
  for (std::size_t p = 0; p < old_procs.size(); ++p) {
    for (TaskIndex i : old_procs[p].tasks) old_owner[q.task(i).id] = p;
  }
  const auto old_incident = incident_pairs(q);
  const auto new_incident = incident_pairs(q2);
  const IdPairs none;
  auto incident = [&](const std::map<std::string, IdPairs>& m, const std::string& id) -> const IdPairs& {
    auto it = m.find(id);
    return it == m.end() ? none : it->second;
  };

  auto procs = decompose_processes(q2);
  std::vector<bool> affected(procs.size(), false);
  for (std::size_t p = 0; p < procs.size(); ++p) {
    const Process& proc = procs[p];
    std::optional<std::size_t> counterpart;
    for (TaskIndex i : proc.tasks) {
      const Task& t = q2.task(i);
      auto old_index = q.find(t.id);
      if (!old_index) {
        affected[p] = true;
        break;
      }
      if (!same_parameters(q.task(*old_index), t) || incident(old_incident, t.id) != incident(new_incident, t.id)) {
        affected[p] = true;
        break;
      }
      Time s = prior.starts.at(t.id);
      if (s < t.earliest_start || s > t.latest_start()) {
        affected[p] = true;
        break;
      }
      std::size_t owner = old_owner.at(t.id);
      if (counterpart && *counterpart != owner) {
        affected[p] = true;
        break;
      }
      counterpart = owner;
    }
    if (affected[p] || !counterpart) continue;
    if (old_procs[*counterpart].tasks.size() != proc.tasks.size()) affected[p] = true;
  }
  std::vector<std::size_t> owner(q2.num_tasks());
  for (std::size_t p = 0; p < procs.size(); ++p) {
    for (TaskIndex i : procs[p].tasks) owner[i] = p;
  }
  // Internal precedence under the prior starts.
  for (auto [a, b] : q2.edges()) {
    const Task& ta = q2.task(a);
    const Task& tb = q2.task(b);
    auto sa = prior.starts.find(ta.id);
    auto sb = prior.starts.find(tb.id);
    if (sa == prior.starts.end() || sb == prior.starts.end() || sa->second + ta.duration > sb->second) {
      affected[owner[a]] = true;
    }
  }

  ReconfigInit out;
  for (std::size_t p = 0; p < procs.size(); ++p) {
    if (affected[p]) {
      out.candidates.push_back(p);
      continue;
    }
    procs[p].scheduled_iteration = 0;
    for (TaskIndex i : procs[p].tasks) out.reused[q2.task(i).id] = prior.starts.at(q2.task(i).id);
  }
  Schedule reused;
  reused.starts = out.reused;
  out.rpu = build_usage_profile(q2, reused);
  out.graph = build_process_graph(q2, std::move(procs), out.rpu, out.rpu.peaks());
  return out;
}

Episode reconfig_episode(const Instance& q, const Schedule& prior, std::shared_ptr<const Instance> q2,
                         SolveOptions options) {
  if (!q2) throw Error("reconfiguration needs an updated instance");
  ReconfigInit init = initialize_reconfig(q, prior, *q2);
  return Episode(std::move(q2), std::move(init.graph), std::move(init.rpu), std::move(init.reused), options);
}

RunResult continual_solve(const Instance& q, const Schedule& prior, const Instance& q2, OrderingPolicy& policy,
                          SelectionPolicy& selector, SolveOptions options) {
  Episode ep = reconfig_episode(q, prior, std::make_shared<const Instance>(q2), options);
  return run_episode(ep, policy, selector);
}

RunResult classical_solve(const Instance& q2, OrderingPolicy& policy, SelectionPolicy& selector,
                          SolveOptions options) {
  return run_with_order(q2, policy, selector, options);
}

}  // namespace isched
