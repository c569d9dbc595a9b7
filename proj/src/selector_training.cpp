#include "isched/selector_training.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <thread>

#include "isched/error.hpp"

namespace isched {

std::string SelectorTrainLog::to_text() const {
  std::ostringstream out;
  for (const auto& n : notes) out << "# " << n << "\n";
  out << "tuples=" << tuples << " skipped=" << skipped << "\n";
  char buf[96];
  for (std::size_t e = 0; e < epoch_loss.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "epoch=%zu loss=%.17g\n", e, epoch_loss[e]);
    out << buf;
  }
  return out.str();
}

namespace {

struct Collected {
  std::vector<RankingTuple> tuples;
  std::size_t skipped = 0;
};

Collected collect_one(const std::shared_ptr<const Instance>& inst, OrderingPolicy order, SelectionPolicy selection,
                      const SelectorTrainConfig& cfg) {
  Collected out;
  SolveOptions options;
  options.pool_size = cfg.pool_size;
  Episode ep = Episode::cold_start(inst, options);
  while (!ep.done()) {
    ProcessId v = order.select_next(ep.graph(), ep.instance(), ep.rpu(), ep.next_iteration());
    SubproblemSpec spec = ep.subproblem(v);
    auto cands = ep.solve(spec);
    const bool room = cfg.max_tuples_per_instance == 0 || out.tuples.size() < cfg.max_tuples_per_instance;
    if (cands.size() >= 2 && room) {
      RankingTuple tuple;
      tuple.state = ep.state();
      bool ok = true;
      for (const auto& c : cands) {
        try {
          Episode branch = ep;
          branch.commit(spec, c);
          OrderingPolicy o = order;
          SelectionPolicy s = selection;
          tuple.objectives.push_back(run_episode(branch, o, s).objective);
          tuple.features.push_back(candidate_features(c, spec, ep.graph(), ep.instance()));
        } catch (const Error&) {
          ok = false;
          break;
        }
      }
      if (ok) {
        out.tuples.push_back(std::move(tuple));
      } else {
        ++out.skipped;
      }
    }
    std::size_t chosen = selection.select(cands, spec, ep.state(), ep.graph(), ep.instance());
    ep.commit(spec, cands[chosen]);
  }
  return out;
}

}  // namespace

std::vector<RankingTuple> collect_ranking_tuples(const std::vector<std::shared_ptr<const Instance>>& instances,
                                                 const OrderingPolicy& order, const SelectionPolicy& selection,
                                                 const SelectorTrainConfig& cfg, SelectorTrainLog* log) {
  std::vector<Collected> per(instances.size());
  std::vector<std::exception_ptr> errors(instances.size());
  auto work = [&](std::size_t i) {
    try {
      per[i] = collect_one(instances[i], order, selection, cfg);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const unsigned threads = std::max(1u, cfg.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < instances.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < instances.size(); i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<RankingTuple> out;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (errors[i]) {
      ++skipped;
      if (log) log->notes.push_back("instance " + std::to_string(i) + " skipped: baseline run failed");
      continue;
    }
    skipped += per[i].skipped;
    for (auto& t : per[i].tuples) out.push_back(std::move(t));
  }
  if (log) {
    log->tuples += out.size();
    log->skipped += skipped;
  }
  return out;
}

SelectorResult train_selector_on_tuples(const std::vector<RankingTuple>& tuples, const SelectorTrainConfig& cfg,
                                        std::uint64_t seed) {
  if (tuples.empty()) throw Error("empty dataset");
  if (cfg.batch_size == 0) throw Error("batch size must be positive");
  std::mt19937_64 rng(seed);
  SelectorResult out;
  out.params = SelectorParams::init(cfg.net, rng());
  out.log.tuples = tuples.size();
  nn::Adam adam(cfg.lr);

  std::vector<std::size_t> order(tuples.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
      const std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
      SelectorParams grad = out.params.zeros_like();
      for (std::size_t i = lo; i < hi; ++i) {
        const RankingTuple& t = tuples[order[i]];
        epoch_loss += rank_loss_params(out.params, t.state, t.features, t.objectives, &grad);
      }
      const double scale = 1.0 / static_cast<double>(hi - lo);
      for (auto& g : grad.tensors()) *g.value *= scale;
      const auto& const_grad = grad;
      adam.step(out.params.tensors(), const_grad.tensors());
    }
    out.log.epoch_loss.push_back(epoch_loss / static_cast<double>(tuples.size()));
  }
  return out;
}

SelectorResult train_selector(const std::vector<std::shared_ptr<const Instance>>& instances,
                              const OrderingPolicy& order, const SelectionPolicy& selection,
                              const SelectorTrainConfig& cfg, std::uint64_t seed) {
  if (selection.kind() == SelectorKind::kRandom || order.kind() == OrderingKind::kRand) {
    throw Error("the rollout baseline must be deterministic");
  }
  SelectorTrainLog log;
  auto tuples = collect_ranking_tuples(instances, order, selection, cfg, &log);
  SelectorResult out = train_selector_on_tuples(tuples, cfg, seed);
  out.log.skipped = log.skipped;
  out.log.notes = log.notes;
  out.log.notes.insert(out.log.notes.begin(), "baseline " + order.name() + "+" + selection.name());
  return out;
}

double ranking_accuracy(const SelectorParams& params, const std::vector<RankingTuple>& tuples) {
  std::size_t pairs = 0;
  std::size_t correct = 0;
  for (const auto& t : tuples) {
    auto s = score_all(params, t.state, t.features);
    for (std::size_t j = 0; j < s.size(); ++j) {
      for (std::size_t k = 0; k < s.size(); ++k) {
        if (!(t.objectives[j] < t.objectives[k])) continue;
        ++pairs;
        if (s[j] < s[k]) ++correct;
      }
    }
  }
  return pairs == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(pairs);
}

}  // namespace isched
