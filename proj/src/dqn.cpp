#include "isched/dqn.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <numeric>
#include <optional>
#include <sstream>

#include "isched/error.hpp"
#include "isched/generator.hpp"

namespace isched {

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error("gamma must lie in (0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error("epsilon must lie in [0, 1]");
  if (target_sync < 1) throw Error("target sync period must be at least 1");
  if (batch_size < 1) throw Error("minibatch size must be at least 1");
  if (replay_capacity < 1) throw Error("replay capacity must be at least 1");
  if (!(lr > 0.0)) throw Error("learning rate must be positive");
  if (pool_size < 1) throw Error("pool size must be at least 1");
}

std::string TrainLog::to_text() const {
  std::ostringstream out;
  for (const auto& n : notes) out << "# " << n << "\n";
  char buf[160];
  for (const auto& e : episodes) {
    std::snprintf(buf, sizeof(buf), "episode=%zu triple=%zu steps=%zu obj=%s reward=%.17g loss=%.17g\n", e.episode,
                  e.triple, e.steps, e.objective.to_string().c_str(), e.reward, e.mean_loss);
    out << buf;
  }
  return out.str();
}

namespace {

void check_triple(const TrainingTriple& t, std::size_t index) {
  const std::string where = "training triple " + std::to_string(index);
  if (!t.original || !t.updated) throw Error(where + " is missing an instance");
  auto r1 = validate_instance(*t.original);
  if (!r1.ok()) throw ConstraintError(where + ": invalid original instance", r1.messages());
  auto r2 = validate_instance(*t.updated);
  if (!r2.ok()) throw ConstraintError(where + ": invalid updated instance", r2.messages());
  auto verdict = check_schedule(*t.original, t.prior);
  if (!verdict.feasible) throw ConstraintError(where + ": prior schedule infeasible", verdict.diagnostics);
}

}  // namespace

DqnResult train_dqn(const std::vector<TrainingTriple>& triples, const TrainConfig& cfg, const SelectionPolicy& selector,
                    std::uint64_t seed) {
  cfg.validate();
  if (triples.empty()) throw Error("no training triples");
  for (std::size_t i = 0; i < triples.size(); ++i) check_triple(triples[i], i);

  std::mt19937_64 rng(seed);
  DqnResult out;
  out.params = QNetworkParams::init(cfg.net, rng());
  QNetworkParams target = out.params;
  nn::Adam adam(cfg.lr);
  ReplayBuffer replay(cfg.replay_capacity);
  // Targets only change when the target network does, so they are kept
  // alongside the replay entries until the next sync.
  std::deque<std::optional<double>> targets;
  SelectionPolicy sel = selector;
  const std::size_t episodes = cfg.episodes == 0 ? triples.size() : cfg.episodes;

  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t global_step = 0;
  bool short_batches = false;

  out.log.notes.push_back("optimizer adam lr=" + std::to_string(cfg.lr));
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    if (ep % triples.size() == 0) std::shuffle(order.begin(), order.end(), rng);
    const std::size_t ti = order[ep % triples.size()];
    const TrainingTriple& triple = triples[ti];
    const Rational opt = lower_bound(*triple.updated).opt;

    SolveOptions options;
    options.pool_size = cfg.pool_size;
    options.seed = rng();
    Episode episode = reconfig_episode(*triple.original, triple.prior, triple.updated, options);

    EpisodeLogEntry entry;
    entry.episode = ep;
    entry.triple = ti;
    double loss_sum = 0.0;
    while (!episode.done()) {
      Transition tr;
      tr.state = episode.state();
      tr.action = act_epsilon_greedy(out.params, tr.state, cfg.epsilon, rng);
      episode.step(tr.action, sel);
      tr.next = episode.state();
      tr.terminal = episode.done();
      if (tr.terminal) {
        entry.objective = episode.objective();
        tr.reward = terminal_reward(entry.objective, opt, cfg.alpha);
        entry.reward = tr.reward;
      }
      replay.push(std::move(tr));
      if (targets.size() == cfg.replay_capacity) targets.pop_front();
      targets.emplace_back();
      ++entry.steps;

      auto picked = replay.sample(cfg.batch_size, rng);
      if (picked.size() < cfg.batch_size) short_batches = true;
      std::vector<TdSample> batch;
      batch.reserve(picked.size());
      for (std::size_t i : picked) {
        const Transition& t = replay.at(i);
        if (!targets[i]) targets[i] = td_target(t, target, cfg.gamma);
        batch.push_back({&t.state, t.action, *targets[i]});
      }
      QNetworkParams grad = out.params.zeros_like();
      loss_sum += td_loss(out.params, batch, &grad, cfg.threads);
      const auto& const_grad = grad;
      adam.step(out.params.tensors(), const_grad.tensors());

      ++global_step;
      if (global_step % cfg.target_sync == 0) {
        target = out.params;
        for (auto& y : targets) y.reset();
      }
    }
    if (entry.steps == 0) entry.objective = episode.objective();
    entry.mean_loss = entry.steps ? loss_sum / static_cast<double>(entry.steps) : 0.0;
    out.log.episodes.push_back(entry);
  }
  if (short_batches) {
    out.log.notes.push_back("minibatches used min(k, |replay|) transitions while the buffer held fewer than k");
  }
  return out;
}

std::vector<TrainingTriple> make_training_triples(const std::vector<Instance>& originals, double fraction,
                                                  std::uint64_t seed) {
  std::vector<TrainingTriple> out;
  std::mt19937_64 rng(seed);
  for (const auto& q : originals) {
    TrainingTriple t;
    t.original = std::make_shared<const Instance>(q);
    auto order = OrderingPolicy::ccpm();
    auto sel = SelectionPolicy::mct();
    t.prior = run_with_order(q, order, sel).schedule;
    t.updated = std::make_shared<const Instance>(apply_delta(q, generate_delta(q, fraction, rng())));
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace isched
