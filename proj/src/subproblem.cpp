#include "isched/subproblem.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>

#include "isched/error.hpp"

namespace isched {

namespace {

// Costs rescaled to integers by the lcm of their denominators, so that the
// search compares exact integer objectives.
struct ScaledCosts {
  std::vector<std::int64_t> weights;
  std::int64_t denominator = 1;

  explicit ScaledCosts(const std::vector<ResourceKind>& resources) {
    for (const auto& r : resources) denominator = std::lcm(denominator, r.unit_cost.den());
    for (const auto& r : resources) weights.push_back(r.unit_cost.num() * (denominator / r.unit_cost.den()));
  }

  std::int64_t cost(const std::vector<Units>& peaks) const {
    std::int64_t total = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) total += weights[k] * peaks[k];
    return total;
  }
};

// Tightens [est, lst] of every task along the precedence edges until a fixed
// point. Returns false if some window becomes empty.
bool propagate(const SubproblemSpec& spec, std::vector<Time>& est, std::vector<Time>& lst) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto [a, b] : spec.edges) {
      Time d = spec.tasks[a].duration;
      if (est[a] + d > est[b]) {
        est[b] = est[a] + d;
        changed = true;
      }
      if (lst[b] - d < lst[a]) {
        lst[a] = lst[b] - d;
        changed = true;
      }
    }
    for (std::size_t i = 0; i < est.size(); ++i) {
      if (est[i] > lst[i]) return false;
    }
  }
  return true;
}

void static_windows(const SubproblemSpec& spec, std::vector<Time>& est, std::vector<Time>& lst) {
  est.resize(spec.tasks.size());
  lst.resize(spec.tasks.size());
  for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
    est[i] = spec.tasks[i].earliest_start;
    lst[i] = spec.tasks[i].latest_start();
  }
  if (!propagate(spec, est, lst)) {
    throw InfeasibleError("subproblem infeasible: process " + std::to_string(spec.process) +
                          " admits no window- and precedence-feasible assignment");
  }
}

// Mutable combined usage (background + committed part of the candidate).
class CombinedUsage {
 public:
  explicit CombinedUsage(const UsageProfile& background)
      : begin_(background.begin()), span_(background.span()), peaks_(background.peaks()) {
    rows_.resize(background.num_resources());
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      auto r = background.row(k);
      rows_[k].assign(r.begin(), r.end());
    }
  }

  const std::vector<Units>& peaks() const { return peaks_; }
  Units at(std::size_t k, Time t) const { return rows_[k][static_cast<std::size_t>(t - begin_)]; }
  std::size_t num_resources() const { return rows_.size(); }

  void add(const Task& task, Time start) {
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      Units r = task.demands[k];
      if (r == 0) continue;
      auto* row = rows_[k].data() + (start - begin_);
      for (Time t = 0; t < task.duration; ++t) {
        row[t] += r;
        peaks_[k] = std::max(peaks_[k], row[t]);
      }
    }
  }

  // Caller restores peaks from its own saved copy.
  void remove(const Task& task, Time start, const std::vector<Units>& saved_peaks) {
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      Units r = task.demands[k];
      if (r == 0) continue;
      auto* row = rows_[k].data() + (start - begin_);
      for (Time t = 0; t < task.duration; ++t) row[t] -= r;
    }
    peaks_ = saved_peaks;
  }

  /// max over s in [first, last] of max_{t in [s, s+d)} row_k(t), written
  /// into out[s - first] (sliding-window maximum).
  void window_max(std::size_t k, Time first, Time last, Time duration, std::vector<Units>& out) const {
    out.assign(static_cast<std::size_t>(last - first + 1), 0);
    const auto& row = rows_[k];
    std::deque<Time> window;  // indices with decreasing values
    Time next = first;
    for (Time s = first; s <= last; ++s) {
      while (next < s + duration) {
        while (!window.empty() && row[static_cast<std::size_t>(window.back() - begin_)] <=
                                      row[static_cast<std::size_t>(next - begin_)]) {
          window.pop_back();
        }
        window.push_back(next);
        ++next;
      }
      while (window.front() < s) window.pop_front();
      out[static_cast<std::size_t>(s - first)] = row[static_cast<std::size_t>(window.front() - begin_)];
    }
  }

 private:
  Time begin_;
  Time span_;
  std::vector<Units> peaks_;
  std::vector<std::vector<Units>> rows_;
};

struct PoolEntry {
  std::int64_t cost;
  std::vector<Time> starts;
};

class BranchAndBound {
 public:
  BranchAndBound(const SubproblemSpec& spec, std::size_t m, const ExactOptions& options)
      : spec_(spec), m_(m), options_(options), costs_(spec.resources), usage_(spec.background) {}

  std::vector<PoolEntry> run(SolveStats& stats) {
    std::vector<Time> est;
    std::vector<Time> lst;
    static_windows(spec_, est, lst);
    starts_.assign(spec_.tasks.size(), 0);
    search(0, est, lst);
    stats.nodes = nodes_;
    stats.proven_optimal = !aborted_;
    return std::move(pool_);
  }

 private:
  bool pool_full() const { return pool_.size() >= m_; }

  // Peak cost plus the compulsory parts [lst, est + d) of unassigned tasks.
  std::int64_t bound(std::size_t first_unassigned, const std::vector<Time>& est,
                     const std::vector<Time>& lst) {
    std::vector<Units> peaks = usage_.peaks();
    const std::size_t n = spec_.tasks.size();
    for (std::size_t k = 0; k < usage_.num_resources(); ++k) {
      scratch_.clear();
      for (std::size_t j = first_unassigned; j < n; ++j) {
        const Task& t = spec_.tasks[j];
        if (t.demands[k] == 0 || lst[j] >= est[j] + t.duration) continue;
        scratch_.emplace_back(lst[j], t.demands[k]);
        scratch_.emplace_back(est[j] + t.duration, -t.demands[k]);
      }
      if (scratch_.empty()) continue;
      std::sort(scratch_.begin(), scratch_.end());
      Units extra = 0;
      for (std::size_t e = 0; e + 1 < scratch_.size(); ++e) {
        extra += scratch_[e].second;
        if (extra <= 0) continue;
        for (Time t = scratch_[e].first; t < scratch_[e + 1].first; ++t) {
          peaks[k] = std::max(peaks[k], usage_.at(k, t) + extra);
        }
      }
    }
    return costs_.cost(peaks);
  }

  void offer(std::int64_t cost) {
    auto pos = std::upper_bound(pool_.begin(), pool_.end(), cost,
                                [](std::int64_t c, const PoolEntry& e) { return c < e.cost; });
    pool_.insert(pos, PoolEntry{cost, starts_});
    if (pool_.size() > m_) pool_.pop_back();
  }

  void search(std::size_t depth, const std::vector<Time>& est, const std::vector<Time>& lst) {
    if (aborted_) return;
    if (++nodes_ > options_.node_limit) {
      aborted_ = true;
      return;
    }
    if (depth == spec_.tasks.size()) {
      std::int64_t cost = costs_.cost(usage_.peaks());
      // Leaves arrive in lexicographic order, so an equal cost never displaces.
      if (!pool_full() || cost < pool_.back().cost) offer(cost);
      return;
    }
    const Task& task = spec_.tasks[depth];
    for (Time s = est[depth]; s <= lst[depth]; ++s) {
      std::vector<Time> child_est = est;
      std::vector<Time> child_lst = lst;
      child_est[depth] = s;
      child_lst[depth] = s;
      if (!propagate(spec_, child_est, child_lst)) continue;

      std::vector<Units> saved_peaks = usage_.peaks();
      usage_.add(task, s);
      starts_[depth] = s;
      if (!pool_full() || bound(depth + 1, child_est, child_lst) < pool_.back().cost) {
        search(depth + 1, child_est, child_lst);
      }
      usage_.remove(task, s, saved_peaks);
      if (aborted_) return;
    }
  }

  const SubproblemSpec& spec_;
  std::size_t m_;
  ExactOptions options_;
  ScaledCosts costs_;
  CombinedUsage usage_;
  std::vector<Time> starts_;
  std::vector<PoolEntry> pool_;
  std::vector<std::pair<Time, Units>> scratch_;
  std::size_t nodes_ = 0;
  bool aborted_ = false;
};

std::vector<CandidateSolution> finalize(const SubproblemSpec& spec, std::vector<PoolEntry> pool) {
  std::vector<CandidateSolution> out;
  out.reserve(pool.size());
  for (auto& e : pool) out.push_back(make_candidate(spec, std::move(e.starts)));
  return out;
}

// One pass of the serial generation scheme under the given priority keys
// (smaller key = scheduled earlier among eligible tasks).
std::vector<Time> serial_sgs(const SubproblemSpec& spec, const ScaledCosts& costs,
                             const std::vector<Time>& static_est, const std::vector<Time>& static_lst,
                             const std::vector<double>& priority) {
  const std::size_t n = spec.tasks.size();
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<std::vector<std::size_t>> succs(n);
  for (auto [a, b] : spec.edges) {
    preds[b].push_back(a);
    succs[a].push_back(b);
  }
  std::vector<std::size_t> pending(n);
  for (std::size_t i = 0; i < n; ++i) pending[i] = preds[i].size();

  CombinedUsage usage(spec.background);
  std::vector<Time> starts(n, 0);
  std::vector<Time> ready_time = static_est;
  std::vector<bool> done(n, false);
  std::vector<Units> window_peak;
  std::vector<std::int64_t> candidate_cost;

  for (std::size_t placed = 0; placed < n; ++placed) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i] || pending[i] != 0) continue;
      if (pick == n || priority[i] < priority[pick]) pick = i;
    }
    const Task& task = spec.tasks[pick];
    const Time first = ready_time[pick];
    const Time last = static_lst[pick];

    candidate_cost.assign(static_cast<std::size_t>(last - first + 1), 0);
    const auto& peaks = usage.peaks();
    for (std::size_t k = 0; k < usage.num_resources(); ++k) {
      if (task.demands[k] == 0) {
        for (auto& c : candidate_cost) c += costs.weights[k] * peaks[k];
        continue;
      }
      usage.window_max(k, first, last, task.duration, window_peak);
      for (std::size_t s = 0; s < candidate_cost.size(); ++s) {
        candidate_cost[s] += costs.weights[k] * std::max(peaks[k], window_peak[s] + task.demands[k]);
      }
    }
    auto best = std::min_element(candidate_cost.begin(), candidate_cost.end());
    Time s = first + static_cast<Time>(best - candidate_cost.begin());

    starts[pick] = s;
    done[pick] = true;
    usage.add(task, s);
    for (std::size_t j : succs[pick]) {
      ready_time[j] = std::max(ready_time[j], s + task.duration);
      --pending[j];
    }
  }
  return starts;
}

}  // namespace

SubproblemSpec construct_subproblem(const ProcessGraph& graph, ProcessId v, const UsageProfile& rpu,
                                    const Instance& inst) {
  if (v >= graph.size()) throw Error("unknown process " + std::to_string(v));
  if (!graph.is_candidate(v)) throw Error("process " + std::to_string(v) + " is already scheduled");
  const Process& proc = graph.processes[v];

  SubproblemSpec spec;
  spec.process = v;
  spec.task_indices = proc.tasks;
  spec.background = rpu;
  spec.resources = inst.resources();
  spec.window_begin = proc.earliest_start;
  spec.window_end = proc.latest_finish;
  std::vector<std::size_t> local(inst.num_tasks(), inst.num_tasks());
  for (std::size_t i = 0; i < proc.tasks.size(); ++i) {
    local[proc.tasks[i]] = i;
    spec.tasks.push_back(inst.task(proc.tasks[i]));
  }
  for (auto [a, b] : inst.edges()) {
    if (local[a] != inst.num_tasks() && local[b] != inst.num_tasks()) spec.edges.emplace_back(local[a], local[b]);
  }
  return spec;
}

CandidateSolution make_candidate(const SubproblemSpec& spec, std::vector<Time> starts) {
  if (starts.size() != spec.tasks.size()) throw Error("candidate start vector has wrong length");
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const Task& t = spec.tasks[i];
    if (starts[i] < t.earliest_start || starts[i] > t.latest_start()) {
      bad.push_back("start of " + t.id + " (" + std::to_string(starts[i]) + ") outside window");
    }
  }
  for (auto [a, b] : spec.edges) {
    if (starts[a] + spec.tasks[a].duration > starts[b]) {
      bad.push_back("precedence " + spec.tasks[a].id + "→" + spec.tasks[b].id + " violated");
    }
  }
  if (!bad.empty()) throw ConstraintError("infeasible candidate", bad);

  CandidateSolution cand;
  cand.local = UsageProfile(spec.background.num_resources(), spec.background.begin(), spec.background.span());
  for (std::size_t i = 0; i < starts.size(); ++i) cand.local.add(spec.tasks[i], starts[i]);
  UsageProfile combined = spec.background + cand.local;
  cand.caps = combined.peaks();
  cand.objective = combined.peak_cost(spec.resources);
  cand.starts = std::move(starts);
  return cand;
}

std::vector<CandidateSolution> solve_exact(const SubproblemSpec& spec, std::size_t m,
                                           ExactOptions options, SolveStats* stats) {
  if (m == 0) throw Error("candidate pool size must be positive");
  SolveStats local_stats;
  BranchAndBound bnb(spec, m, options);
  auto pool = bnb.run(local_stats);
  if (stats) *stats = local_stats;
  return finalize(spec, std::move(pool));
}

std::vector<CandidateSolution> solve_heuristic(const SubproblemSpec& spec, std::size_t m,
                                               std::uint64_t seed) {
  if (m == 0) throw Error("candidate pool size must be positive");
  std::vector<Time> est;
  std::vector<Time> lst;
  static_windows(spec, est, lst);
  const std::size_t n = spec.tasks.size();
  if (n == 0) return {make_candidate(spec, {})};

  ScaledCosts costs(spec.resources);
  std::vector<std::vector<double>> rules;
  {
    std::vector<double> min_slack(n);
    std::vector<double> max_demand(n);
    for (std::size_t i = 0; i < n; ++i) {
      min_slack[i] = static_cast<double>(lst[i] - est[i]);
      double demand = 0.0;
      for (std::size_t k = 0; k < costs.weights.size(); ++k) {
        demand += static_cast<double>(costs.weights[k] * spec.tasks[i].demands[k] * spec.tasks[i].duration);
      }
      max_demand[i] = -demand;
    }
    rules.push_back(std::move(min_slack));
    rules.push_back(std::move(max_demand));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t r = 0; r < m; ++r) {
    std::vector<double> keys(n);
    for (auto& key : keys) key = unit(rng);
    rules.push_back(std::move(keys));
  }

  std::vector<PoolEntry> pool;
  for (const auto& priority : rules) {
    auto starts = serial_sgs(spec, costs, est, lst, priority);
    auto cand = make_candidate(spec, starts);
    bool duplicate = std::any_of(pool.begin(), pool.end(), [&](const PoolEntry& e) { return e.starts == starts; });
    if (duplicate) continue;
    pool.push_back({costs.cost(cand.caps), std::move(starts)});
  }
  std::sort(pool.begin(), pool.end(), [](const PoolEntry& a, const PoolEntry& b) {
    return a.cost != b.cost ? a.cost < b.cost : a.starts < b.starts;
  });
  if (pool.size() > m) pool.resize(m);
  return finalize(spec, std::move(pool));
}

std::vector<CandidateSolution> solve_subproblem(const SubproblemSpec& spec, std::size_t m,
                                                std::uint64_t seed, SolveStats* stats) {
  if (spec.tasks.size() <= kExactThreshold) {
    auto result = solve_exact(spec, m, {}, stats);
    if (!result.empty()) return result;
  }
  if (stats) stats->proven_optimal = false;
  return solve_heuristic(spec, m, seed);
}

CommitResult commit(const UsageProfile& rpu, const CandidateSolution& cand, const ProcessGraph& graph,
                    ProcessId v, int iteration, const Instance& inst) {
  if (v >= graph.size()) throw Error("unknown process " + std::to_string(v));
  if (!graph.is_candidate(v)) throw Error("process " + std::to_string(v) + " is already committed");
  if (cand.starts.size() != graph.processes[v].tasks.size()) {
    throw Error("candidate does not belong to process " + std::to_string(v));
  }
  CommitResult out;
  out.rpu = rpu;
  out.rpu += cand.local;
  ProcessGraph marked = graph;
  marked.processes[v].scheduled_iteration = iteration;
  out.graph = refresh_features(marked, inst, out.rpu);
  return out;
}

}  // namespace isched
