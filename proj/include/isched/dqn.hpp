#ifndef ISCHED_DQN_HPP_
#define ISCHED_DQN_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "isched/continual.hpp"
#include "isched/qnet.hpp"

namespace isched {

struct TrainConfig {
  double alpha = 100.0;
  double gamma = 0.9;
  double epsilon = 0.05;
  std::size_t target_sync = 10;       // K
  std::size_t replay_capacity = 10000;  // N
  std::size_t batch_size = 128;       // k
  double lr = 1e-3;
  /// Episode budget M; 0 means one episode per training triple.
  std::size_t episodes = 0;
  std::size_t pool_size = kDefaultPoolSize;
  NetConfig net;
  unsigned threads = 1;

  /// Throws isched::Error when a value is out of range.
  void validate() const;
};

/// (q, prior schedule for q, q′).
struct TrainingTriple {
  std::shared_ptr<const Instance> original;
  Schedule prior;
  std::shared_ptr<const Instance> updated;
};

struct EpisodeLogEntry {
  std::size_t episode = 0;
  std::size_t triple = 0;
  std::size_t steps = 0;
  Rational objective;
  double reward = 0.0;
  double mean_loss = 0.0;
};

struct TrainLog {
  std::vector<EpisodeLogEntry> episodes;
  std::vector<std::string> notes;

  /// One line per episode, doubles printed with 17 significant digits.
  std::string to_text() const;
};

struct DqnResult {
  QNetworkParams params;
  TrainLog log;
};

/// Reconfiguration-aware DQN: each episode starts from initialize_reconfig
/// on a triple, acts ε-greedily, uses `selector` to commit candidates,
/// stores transitions, and takes one Adam step on the TD loss per
/// environment step; the target network is synchronised every K steps.
DqnResult train_dqn(const std::vector<TrainingTriple>& triples, const TrainConfig& cfg, const SelectionPolicy& selector,
                    std::uint64_t seed);

/// Triples built from `originals`: prior = cold CCPM+MCT schedule of q,
/// q′ = q with generate_delta(q, fraction) applied.
std::vector<TrainingTriple> make_training_triples(const std::vector<Instance>& originals, double fraction,
                                                  std::uint64_t seed);

}  // namespace isched

#endif  // ISCHED_DQN_HPP_
