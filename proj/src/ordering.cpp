#include "isched/ordering.hpp"

#include "isched/error.hpp"

namespace isched {

OrderingPolicy OrderingPolicy::ccpm() { return OrderingPolicy(OrderingKind::kCcpm); }
OrderingPolicy OrderingPolicy::mrrr() { return OrderingPolicy(OrderingKind::kMrrr); }
OrderingPolicy OrderingPolicy::dum() { return OrderingPolicy(OrderingKind::kDum); }

OrderingPolicy OrderingPolicy::random(std::uint64_t seed) {
  OrderingPolicy p(OrderingKind::kRand);
  p.rng_.seed(seed);
  return p;
}

OrderingPolicy OrderingPolicy::rl(std::shared_ptr<const QNetworkParams> params) {
  if (!params) throw Error("rl ordering needs Q-network parameters");
  OrderingPolicy p(OrderingKind::kRl);
  p.params_ = std::move(params);
  return p;
}

OrderingPolicy OrderingPolicy::from_name(const std::string& name, std::uint64_t seed,
                                         std::shared_ptr<const QNetworkParams> params) {
  if (name == "ccpm") return ccpm();
  if (name == "mrrr") return mrrr();
  if (name == "dum") return dum();
  if (name == "rand") return random(seed);
  if (name == "rl") return rl(std::move(params));
  throw Error("unknown ordering policy '" + name + "'");
}

std::string OrderingPolicy::name() const {
  switch (kind_) {
    case OrderingKind::kCcpm:
      return "ccpm";
    case OrderingKind::kMrrr:
      return "mrrr";
    case OrderingKind::kDum:
      return "dum";
    case OrderingKind::kRand:
      return "rand";
    case OrderingKind::kRl:
      return "rl";
  }
  return "?";
}

Rational resource_requirement(const Process& proc, const Instance& inst) {
  Rational total(0);
  for (TaskIndex i : proc.tasks) {
    const Task& t = inst.task(i);
    for (std::size_t k = 0; k < inst.num_resources(); ++k) {
      total = total + inst.resources()[k].unit_cost * Rational(t.demands[k] * t.duration);
    }
  }
  return total;
}

ProcessId OrderingPolicy::select_next(const ProcessGraph& graph, const Instance& inst, const UsageProfile& rpu,
                                      int iteration) {
  (void)rpu;
  auto cands = graph.candidates();
  if (cands.empty()) throw Error("no candidate processes left");

  auto processing_time = [&](ProcessId id) {
    Time pt = 0;
    for (TaskIndex i : graph.processes[id].tasks) pt += inst.task(i).duration;
    return pt;
  };

  switch (kind_) {
    case OrderingKind::kCcpm: {
      ProcessId best = cands.front();
      Time best_pt = processing_time(best);
      for (ProcessId c : cands) {
        const Time lf = graph.processes[c].latest_finish;
        const Time best_lf = graph.processes[best].latest_finish;
        Time pt = processing_time(c);
        if (lf < best_lf || (lf == best_lf && pt > best_pt)) {
          best = c;
          best_pt = pt;
        }
      }
      return best;
    }
    case OrderingKind::kMrrr: {
      ProcessId best = cands.front();
      Rational best_req = resource_requirement(graph.processes[best], inst);
      for (ProcessId c : cands) {
        Rational req = resource_requirement(graph.processes[c], inst);
        if (req > best_req) {
          best = c;
          best_req = req;
        }
      }
      return best;
    }
    case OrderingKind::kDum: {
      ProcessId best = cands.front();
      for (ProcessId c : cands) {
        if (graph.processes[c].tasks.size() > graph.processes[best].tasks.size()) best = c;
      }
      return best;
    }
    case OrderingKind::kRand: {
      std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
      return cands[pick(rng_)];
    }
    case OrderingKind::kRl:
      return greedy_action(*params_, encode_state(graph, iteration));
  }
  return cands.front();
}

}  // namespace isched
