#ifndef ISCHED_SELECTOR_TRAINING_HPP_
#define ISCHED_SELECTOR_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "isched/episode.hpp"

namespace isched {

struct SelectorTrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 8;  // tuples per Adam step
  double lr = 1e-3;
  std::size_t pool_size = kDefaultPoolSize;
  /// Cap on collected tuples per instance; 0 keeps every iteration.
  std::size_t max_tuples_per_instance = 0;
  NetConfig net;
  unsigned threads = 1;
};

/// (x_v, candidate features, final objective of each candidate's rollout).
struct RankingTuple {
  GraphState state;
  std::vector<CandidateFeatures> features;
  std::vector<Rational> objectives;
};

struct SelectorTrainLog {
  std::size_t tuples = 0;
  std::size_t skipped = 0;
  std::vector<double> epoch_loss;
  std::vector<std::string> notes;

  std::string to_text() const;
};

struct SelectorResult {
  SelectorParams params;
  SelectorTrainLog log;
};

/// Walks every instance under the baseline; at each iteration with at least
/// two candidates, commits each candidate in turn and completes the episode
/// with the baseline to obtain Obj_j. Rollouts that fail are skipped and
/// counted in `log`.
std::vector<RankingTuple> collect_ranking_tuples(const std::vector<std::shared_ptr<const Instance>>& instances,
                                                 const OrderingPolicy& order, const SelectionPolicy& selection,
                                                 const SelectorTrainConfig& cfg, SelectorTrainLog* log = nullptr);

/// Minimises the pairwise ranking loss with Adam. Throws "empty dataset"
/// when there is nothing to learn from.
SelectorResult train_selector_on_tuples(const std::vector<RankingTuple>& tuples, const SelectorTrainConfig& cfg,
                                        std::uint64_t seed);

SelectorResult train_selector(const std::vector<std::shared_ptr<const Instance>>& instances,
                              const OrderingPolicy& order, const SelectionPolicy& selection,
                              const SelectorTrainConfig& cfg, std::uint64_t seed);

/// Fraction of strictly ordered candidate pairs whose scores rank the
/// better candidate lower.
double ranking_accuracy(const SelectorParams& params, const std::vector<RankingTuple>& tuples);

}  // namespace isched

#endif  // ISCHED_SELECTOR_TRAINING_HPP_
