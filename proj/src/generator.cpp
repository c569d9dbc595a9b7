#include "isched/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "isched/error.hpp"

namespace isched {

namespace {

template <typename T>
T uniform(std::mt19937_64& rng, T lo, T hi) {
  return std::uniform_int_distribution<T>(lo, hi)(rng);
}

std::string task_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "t%05zu", i);
  return buf;
}

}  // namespace

GeneratedInstance generate_instance(const GenConfig& cfg) {
  if (cfg.processes == 0) throw Error("generator needs at least one process");
  if (cfg.max_tasks < cfg.min_tasks) throw Error("task range is empty");
  if (cfg.max_tasks < cfg.processes) throw Error("task range lies below the process count");
  if (cfg.min_duration < 1 || cfg.max_duration < cfg.min_duration) throw Error("invalid duration range");
  if (cfg.max_demand < 1) throw Error("max demand must be positive");
  if (cfg.min_cost < 0 || cfg.max_cost < cfg.min_cost || cfg.max_cost == 0) throw Error("invalid cost range");
  if (cfg.slack_variation < 0.0 || cfg.slack_variation > 1.0) throw Error("slack variation must lie in [0, 1]");
  if (cfg.slack < 0.0 || cfg.spread < 0.0 || cfg.precedence_density < 0.0) throw Error("negative generator knob");

  std::mt19937_64 rng(cfg.seed);
  const std::size_t total = uniform<std::size_t>(rng, std::max(cfg.min_tasks, cfg.processes), cfg.max_tasks);
  const std::size_t n = cfg.processes;

  std::vector<std::size_t> sizes(n, 1);
  for (std::size_t i = n; i < total; ++i) ++sizes[uniform<std::size_t>(rng, 0, n - 1)];

  std::vector<Time> duration(total);
  for (auto& d : duration) d = uniform<Time>(rng, cfg.min_duration, cfg.max_duration);

  // Local DAGs: every task after the first hangs off a random earlier task.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> first(n);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < n; ++p) {
    first[p] = offset;
    for (std::size_t j = 1; j < sizes[p]; ++j) {
      std::size_t parent = uniform<std::size_t>(rng, 0, j - 1);
      edges.emplace_back(offset + parent, offset + j);
      if (j >= 2 && std::bernoulli_distribution(std::min(1.0, cfg.precedence_density))(rng)) {
        std::size_t other = uniform<std::size_t>(rng, 0, j - 1);
        if (other != parent) edges.emplace_back(offset + other, offset + j);
      }
    }
    offset += sizes[p];
  }

  // Seed schedule: chronological within each process from its release time.
  std::vector<std::vector<std::size_t>> preds(total);
  for (auto [a, b] : edges) preds[b].push_back(a);
  std::vector<Time> start(total, 0);
  std::vector<Time> length(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = first[p]; i < first[p] + sizes[p]; ++i) {
      Time s = 0;
      for (std::size_t a : preds[i]) s = std::max(s, start[a] + duration[a]);
      start[i] = s + uniform<Time>(rng, 0, 1);
      length[p] = std::max(length[p], start[i] + duration[i]);
    }
  }
  const double mean_length = std::accumulate(length.begin(), length.end(), 0.0) / static_cast<double>(n);
  const Time release_max = static_cast<Time>(std::llround(cfg.spread * mean_length));
  for (std::size_t p = 0; p < n; ++p) {
    Time release = uniform<Time>(rng, 0, std::max<Time>(release_max, 0));
    for (std::size_t i = first[p]; i < first[p] + sizes[p]; ++i) start[i] += release;
  }

  std::vector<double> slack(n, cfg.slack);
  if (cfg.slack_variation > 0.0) {
    std::uniform_real_distribution<double> factor(1.0 - cfg.slack_variation, 1.0 + cfg.slack_variation);
    for (auto& s : slack) s *= factor(rng);
  }
  std::vector<std::size_t> owner(total);
  for (std::size_t p = 0; p < n; ++p) std::fill_n(owner.begin() + static_cast<std::ptrdiff_t>(first[p]), sizes[p], p);

  std::vector<std::size_t> label(total);
  std::iota(label.begin(), label.end(), 0);
  std::shuffle(label.begin(), label.end(), rng);

  std::vector<ResourceKind> resources;
  for (std::size_t k = 0; k < cfg.num_resources; ++k) {
    resources.push_back({"r" + std::to_string(k), Rational(uniform<std::int64_t>(rng, cfg.min_cost, cfg.max_cost))});
  }

  std::vector<Task> tasks;
  GeneratedInstance out;
  for (std::size_t i = 0; i < total; ++i) {
    Task t;
    t.id = task_name(label[i]);
    t.duration = duration[i];
    const Time side = static_cast<Time>(std::floor(slack[owner[i]] * static_cast<double>(duration[i])));
    t.earliest_start = std::max<Time>(0, start[i] - uniform<Time>(rng, 0, side));
    t.deadline = start[i] + duration[i] + uniform<Time>(rng, 0, side);
    t.demands.resize(cfg.num_resources);
    bool any = false;
    for (auto& r : t.demands) {
      r = uniform<Units>(rng, 0, cfg.max_demand);
      any = any || r > 0;
    }
    if (!any && cfg.num_resources > 0) t.demands[uniform<std::size_t>(rng, 0, cfg.num_resources - 1)] = 1;
    out.witness.starts[t.id] = start[i];
    tasks.push_back(std::move(t));
  }
  std::vector<Precedence> prec;
  for (auto [a, b] : edges) prec.push_back({task_name(label[a]), task_name(label[b])});
  out.instance = Instance(std::move(tasks), std::move(resources), std::move(prec));
  return out;
}

std::optional<Schedule> earliest_start_schedule(const Instance& inst) {
  const std::size_t n = inst.num_tasks();
  std::vector<std::size_t> indegree(n, 0);
  for (auto [a, b] : inst.edges()) {
    (void)a;
    ++indegree[b];
  }
  std::vector<TaskIndex> queue;
  for (TaskIndex i = 0; i < n; ++i) {
    if (indegree[i] == 0) queue.push_back(i);
  }
  std::vector<Time> start(n);
  for (TaskIndex i = 0; i < n; ++i) start[i] = inst.task(i).earliest_start;
  std::size_t head = 0;
  while (head < queue.size()) {
    TaskIndex i = queue[head++];
    for (TaskIndex j : inst.successors()[i]) {
      start[j] = std::max(start[j], start[i] + inst.task(i).duration);
      if (--indegree[j] == 0) queue.push_back(j);
    }
  }
  if (queue.size() != n) return std::nullopt;
  Schedule s;
  for (TaskIndex i = 0; i < n; ++i) {
    if (start[i] > inst.task(i).latest_start()) return std::nullopt;
    s.starts[inst.task(i).id] = start[i];
  }
  return s;
}

ReconfigDelta generate_delta(const Instance& inst, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("delta fraction must lie in (0, 1]");
  ReconfigDelta delta;
  const std::size_t n = inst.num_tasks();
  if (n == 0) return delta;
  auto witness = earliest_start_schedule(inst);
  if (!witness) throw Error("instance admits no schedule to perturb around");

  std::mt19937_64 rng(seed);
  const auto count = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));
  std::vector<TaskIndex> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < count; ++i) std::swap(order[i], order[uniform<std::size_t>(rng, i, n - 1)]);
  order.resize(count);
  std::sort(order.begin(), order.end());

  Units max_demand = 1;
  for (const auto& t : inst.tasks()) {
    for (Units r : t.demands) max_demand = std::max(max_demand, r);
  }

  for (TaskIndex i : order) {
    Task t = inst.task(i);
    const Time s = witness->starts.at(t.id);
    int mode = uniform<int>(rng, 0, 2);
    if (mode == 0) {
      // Duration, bounded by the witness starts of the successors.
      Time room = t.duration + 3;
      for (TaskIndex j : inst.successors()[i]) room = std::min(room, witness->starts.at(inst.task(j).id) - s);
      if (room > 1) {
        Time d = uniform<Time>(rng, 1, room - 1);
        if (d >= t.duration) ++d;
        t.duration = d;
        t.earliest_start = std::min(t.earliest_start, s);
        t.deadline = std::max(t.deadline, s + t.duration);
      } else {
        mode = 2;
      }
    }
    if (mode == 1) {
      const Time side = t.duration;
      t.earliest_start = std::max<Time>(0, s - uniform<Time>(rng, 0, side));
      t.deadline = s + t.duration + uniform<Time>(rng, 0, side);
      if (t == inst.task(i)) ++t.deadline;
    }
    if (mode == 2 && !t.demands.empty()) {
      for (auto& r : t.demands) r = uniform<Units>(rng, 0, max_demand);
      if (t.demands == inst.task(i).demands) t.demands[0] += 1;
    }
    if (t == inst.task(i)) ++t.deadline;  // no resource kinds to perturb
    delta.modified[t.id] = std::move(t);
  }
  return delta;
}

Difficulty classify(std::size_t processes, std::size_t tasks) {
  if (processes == 100 && tasks >= 2634 && tasks <= 3589) return Difficulty::kEasy;
  if (processes == 200 && tasks >= 5566 && tasks <= 6572) return Difficulty::kNormal;
  if (processes == 300 && tasks >= 8929 && tasks <= 9509) return Difficulty::kHard;
  return Difficulty::kUnclassified;
}

std::string difficulty_name(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy:
      return "easy";
    case Difficulty::kNormal:
      return "normal";
    case Difficulty::kHard:
      return "hard";
    case Difficulty::kUnclassified:
      return "unclassified";
  }
  return "?";
}

GenConfig difficulty_config(Difficulty d, std::uint64_t seed) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.num_resources = 3;
  switch (d) {
    case Difficulty::kEasy:
      cfg.processes = 100;
      cfg.min_tasks = 2634;
      cfg.max_tasks = 3589;
      break;
    case Difficulty::kNormal:
      cfg.processes = 200;
      cfg.min_tasks = 5566;
      cfg.max_tasks = 6572;
      break;
    case Difficulty::kHard:
      cfg.processes = 300;
      cfg.min_tasks = 8929;
      cfg.max_tasks = 9509;
      break;
    case Difficulty::kUnclassified:
      break;
  }
  return cfg;
}

}  // namespace isched
