#include "isched/decomposition.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "isched/error.hpp"

namespace isched {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;  // root is always the smallest member
  }

 private:
  std::vector<std::size_t> parent_;
};

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::vector<ProcessId> ProcessGraph::candidates() const {
  std::vector<ProcessId> out;
  for (const auto& p : processes) {
    if (!p.scheduled()) out.push_back(p.id);
  }
  return out;
}

EdgeFeatures ProcessGraph::oriented_features(std::size_t edge, ProcessId from) const {
  EdgeFeatures f = edges[edge].features;
  if (from == edges[edge].b) std::swap(f[3], f[4]);
  return f;
}

std::vector<Process> decompose_processes(const Instance& inst) {
  const std::size_t n = inst.num_tasks();
  DisjointSets sets(n);
  for (auto [a, b] : inst.edges()) sets.unite(a, b);

  std::vector<std::size_t> slot(n, n);
  std::vector<Process> procs;
  for (TaskIndex i = 0; i < n; ++i) {
    std::size_t root = sets.find(i);
    if (slot[root] == n) {
      slot[root] = procs.size();
      Process p;
      p.id = procs.size();
      procs.push_back(std::move(p));
    }
    procs[slot[root]].tasks.push_back(i);
  }

  for (auto& p : procs) {
    p.uses_resource.assign(inst.num_resources(), false);
    p.earliest_start = inst.task(p.tasks.front()).earliest_start;
    p.latest_finish = inst.task(p.tasks.front()).deadline;
    std::vector<std::pair<Time, Time>> windows;
    for (TaskIndex i : p.tasks) {
      const Task& t = inst.task(i);
      p.earliest_start = std::min(p.earliest_start, t.earliest_start);
      p.latest_finish = std::max(p.latest_finish, t.deadline);
      windows.emplace_back(t.earliest_start, t.deadline);
      for (std::size_t k = 0; k < inst.num_resources() && k < t.demands.size(); ++k) {
        if (t.demands[k] > 0) p.uses_resource[k] = true;
      }
    }
    std::sort(windows.begin(), windows.end());
    for (const auto& w : windows) {
      if (!p.windows.empty() && w.first <= p.windows.back().second) {
        p.windows.back().second = std::max(p.windows.back().second, w.second);
      } else {
        p.windows.push_back(w);
      }
    }
  }
  return procs;
}

bool windows_overlap(const Process& pi, const Process& pj) {
  if (pi.latest_finish < pj.earliest_start || pj.latest_finish < pi.earliest_start) return false;
  std::size_t a = 0;
  std::size_t b = 0;
  while (a < pi.windows.size() && b < pj.windows.size()) {
    const auto& wa = pi.windows[a];
    const auto& wb = pj.windows[b];
    if (std::max(wa.first, wb.first) <= std::min(wa.second, wb.second)) return true;
    if (wa.second < wb.second) {
      ++a;
    } else {
      ++b;
    }
  }
  return false;
}

namespace {

// Prefix sums of the usage profile so that window sums are O(1).
class UsageIndex {
 public:
  UsageIndex(const Instance& inst, const UsageProfile& rpu, const std::vector<Units>& caps)
      : costs_(inst.cost_vector()), total_cost_(inst.total_cost()), caps_(caps), begin_(rpu.begin()) {
    if (total_cost_ <= 0.0) throw Error("degenerate cost vector");
    prefix_.resize(rpu.num_resources());
    for (std::size_t k = 0; k < rpu.num_resources(); ++k) {
      auto row = rpu.row(k);
      prefix_[k].assign(row.size() + 1, 0);
      for (std::size_t t = 0; t < row.size(); ++t) prefix_[k][t + 1] = prefix_[k][t] + row[t];
    }
  }

  double total_cost() const { return total_cost_; }
  const std::vector<double>& costs() const { return costs_; }

  Units window_sum(std::size_t k, Time from, Time to) const {
    const auto& p = prefix_[k];
    const Time span = static_cast<Time>(p.size()) - 1;
    Time lo = std::max<Time>(from - begin_, 0);
    Time hi = std::min<Time>(to - begin_ + 1, span);
    if (hi <= lo) return 0;
    return p[static_cast<std::size_t>(hi)] - p[static_cast<std::size_t>(lo)];
  }

  double wru(Time from, Time to) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < prefix_.size(); ++k) {
      if (k >= caps_.size() || caps_[k] == 0) continue;
      sum += costs_[k] / static_cast<double>(caps_[k]) * static_cast<double>(window_sum(k, from, to));
    }
    return sum / total_cost_;
  }

 private:
  std::vector<double> costs_;
  double total_cost_;
  std::vector<Units> caps_;
  Time begin_;
  std::vector<std::vector<Units>> prefix_;
};

NodeFeatures compute_node_features(const Process& proc, const Instance& inst, const UsageIndex& usage) {
  const auto& costs = usage.costs();
  double processing_time = 0.0;
  double weighted_demand = 0.0;
  for (TaskIndex i : proc.tasks) {
    const Task& t = inst.task(i);
    processing_time += static_cast<double>(t.duration);
    for (std::size_t k = 0; k < costs.size(); ++k) weighted_demand += costs[k] * static_cast<double>(t.demands[k]);
  }
  weighted_demand /= static_cast<double>(proc.tasks.size()) * usage.total_cost();

  NodeFeatures f{};
  f[0] = processing_time;
  f[1] = weighted_demand;
  f[2] = proc.scheduled_iteration ? static_cast<double>(*proc.scheduled_iteration) : 0.0;
  f[3] = usage.wru(proc.earliest_start, proc.latest_finish);
  return f;
}

EdgeFeatures compute_edge_features(const Process& pi, const Process& pj, const Instance& inst,
                                   const UsageIndex& usage) {
  const Time t_start = std::max(pi.earliest_start, pj.earliest_start);
  const Time t_end = std::min(pi.latest_finish, pj.latest_finish);

  std::size_t shared = 0;
  for (std::size_t k = 0; k < inst.num_resources(); ++k) {
    if (pi.uses_resource[k] && pj.uses_resource[k]) ++shared;
  }
  // Both per-process terms are measured over the same overlap window.
  const double window_usage = usage.wru(t_start, t_end);

  EdgeFeatures f{};
  f[0] = static_cast<double>(t_start);
  f[1] = static_cast<double>(t_end);
  f[2] = inst.num_resources() == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(inst.num_resources());
  f[3] = window_usage;
  f[4] = window_usage;
  f[5] = f[3] + f[4];
  f[6] = window_usage / static_cast<double>(t_end - t_start + 1);
  return f;
}

}  // namespace

double weighted_resource_usage(const Instance& inst, const UsageProfile& rpu,
                               const std::vector<Units>& caps, Time from, Time to) {
  return UsageIndex(inst, rpu, caps).wru(from, to);
}

NodeFeatures node_features(const Process& proc, const Instance& inst, const UsageProfile& rpu,
                           const std::vector<Units>& caps) {
  return compute_node_features(proc, inst, UsageIndex(inst, rpu, caps));
}

EdgeFeatures edge_features(const Process& pi, const Process& pj, const Instance& inst,
                           const UsageProfile& rpu, const std::vector<Units>& caps) {
  if (!windows_overlap(pi, pj)) {
    throw Error("processes " + std::to_string(pi.id) + " and " + std::to_string(pj.id) +
                " have no overlapping windows");
  }
  return compute_edge_features(pi, pj, inst, UsageIndex(inst, rpu, caps));
}

ProcessGraph build_process_graph(const Instance& inst, std::vector<Process> procs,
                                 const UsageProfile& rpu, const std::vector<Units>& caps) {
  ProcessGraph g;
  g.processes = std::move(procs);
  g.caps = caps;
  const UsageIndex usage(inst, rpu, caps);
  g.node_features.reserve(g.processes.size());
  for (const auto& p : g.processes) g.node_features.push_back(compute_node_features(p, inst, usage));

  g.adjacency.assign(g.processes.size(), {});
  for (ProcessId a = 0; a < g.processes.size(); ++a) {
    for (ProcessId b = a + 1; b < g.processes.size(); ++b) {
      if (!windows_overlap(g.processes[a], g.processes[b])) continue;
      std::size_t e = g.edges.size();
      g.edges.push_back({a, b, compute_edge_features(g.processes[a], g.processes[b], inst, usage)});
      g.adjacency[a].emplace_back(b, e);
      g.adjacency[b].emplace_back(a, e);
    }
  }
  for (auto& adj : g.adjacency) std::sort(adj.begin(), adj.end());
  return g;
}

ProcessGraph refresh_features(const ProcessGraph& graph, const Instance& inst, const UsageProfile& rpu) {
  ProcessGraph g;
  g.processes = graph.processes;
  g.edges = graph.edges;
  g.adjacency = graph.adjacency;
  g.caps = rpu.peaks();
  const UsageIndex usage(inst, rpu, g.caps);
  g.node_features.reserve(g.processes.size());
  for (const auto& p : g.processes) g.node_features.push_back(compute_node_features(p, inst, usage));
  for (auto& e : g.edges) e.features = compute_edge_features(g.processes[e.a], g.processes[e.b], inst, usage);
  return g;
}

std::string dump_process_graph(const ProcessGraph& graph, const Instance& inst) {
  std::ostringstream out;
  for (const auto& p : graph.processes) {
    out << "node " << p.id << " status=";
    if (p.scheduled()) {
      out << "scheduled:" << *p.scheduled_iteration;
    } else {
      out << "unscheduled";
    }
    out << " window=[" << p.earliest_start << "," << p.latest_finish << "] tasks=";
    for (std::size_t i = 0; i < p.tasks.size(); ++i) out << (i ? "," : "") << inst.task(p.tasks[i]).id;
    out << " features=";
    for (std::size_t i = 0; i < kNodeFeatureDim; ++i) out << (i ? " " : "") << format_double(graph.node_features[p.id][i]);
    out << "\n";
  }
  for (const auto& e : graph.edges) {
    out << "edge " << e.a << " " << e.b << " features=";
    for (std::size_t i = 0; i < kEdgeFeatureDim; ++i) out << (i ? " " : "") << format_double(e.features[i]);
    out << "\n";
  }
  return out.str();
}

}  // namespace isched
