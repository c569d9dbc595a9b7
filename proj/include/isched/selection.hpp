#ifndef ISCHED_SELECTION_HPP_
#define ISCHED_SELECTION_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "isched/qnet.hpp"
#include "isched/subproblem.hpp"

namespace isched {

/// [RMS, total variation, peak, peak position, overlap fraction, mean slack,
///  min slack, incremental cost]. The first four describe the cost-weighted
/// local profile w(t) = Σ_k c_k local_k(t) / Σ_k c_k over the horizon.
constexpr std::size_t kCandidateFeatureDim = 8;
using CandidateFeatures = std::array<double, kCandidateFeatureDim>;

CandidateFeatures candidate_features(const CandidateSolution& cand, const SubproblemSpec& spec,
                                     const ProcessGraph& graph, const Instance& inst);

/// F_φ: separate GATv2 encoder, mean pooled, then an MLP over [h_v ‖ z].
struct SelectorParams {
  NetConfig config;
  nn::GatEncoder encoder;
  nn::Mlp head;

  static SelectorParams init(const NetConfig& config, std::uint64_t seed);
  SelectorParams zeros_like() const;
  std::vector<nn::TensorRef> tensors();
  std::vector<nn::ConstTensorRef> tensors() const;
};

/// Mean-pooled graph embedding h_v.
nn::Vector graph_embedding(const SelectorParams& params, const GraphState& state);

double score(const SelectorParams& params, const GraphState& state, const CandidateFeatures& feats);
std::vector<double> score_all(const SelectorParams& params, const GraphState& state,
                              const std::vector<CandidateFeatures>& feats);

/// Σ over pairs with obj_j < obj_k of log(1 + exp(s_j - s_k)).
double rank_loss(const std::vector<double>& scores, const std::vector<Rational>& objectives);
/// d rank_loss / d s.
std::vector<double> rank_loss_grad(const std::vector<double>& scores, const std::vector<Rational>& objectives);

/// rank_loss of the network scores for one tuple; adds the parameter
/// gradient into `grad` when given.
double rank_loss_params(const SelectorParams& params, const GraphState& state,
                        const std::vector<CandidateFeatures>& feats, const std::vector<Rational>& objectives,
                        SelectorParams* grad = nullptr);

/// Σ_k c_k Σ_t |u'_k(t+1) - u'_k(t)| of the combined profile.
Rational total_variation_cost(const UsageProfile& combined, const std::vector<ResourceKind>& resources);
/// Cost-weighted mean absolute adjacent difference of the combined profile.
Rational mean_abs_difference_cost(const UsageProfile& combined, const std::vector<ResourceKind>& resources);
/// max_i S_i + d_i over the candidate's tasks.
Time completion_time(const CandidateSolution& cand, const SubproblemSpec& spec);

enum class SelectorKind { kLearned, kMad, kTv, kMct, kRandom };

class SelectionPolicy {
 public:
  static SelectionPolicy learned(std::shared_ptr<const SelectorParams> params);
  static SelectionPolicy mad();
  static SelectionPolicy tv();
  static SelectionPolicy mct();
  static SelectionPolicy random(std::uint64_t seed);
  /// learned | mad | tv | mct | rand
  static SelectionPolicy from_name(const std::string& name, std::uint64_t seed,
                                   std::shared_ptr<const SelectorParams> params = nullptr);

  SelectorKind kind() const { return kind_; }
  std::string name() const;

  /// Index of the chosen candidate; every deterministic rule breaks ties
  /// towards the smaller index.
  std::size_t select(const std::vector<CandidateSolution>& candidates, const SubproblemSpec& spec,
                     const GraphState& state, const ProcessGraph& graph, const Instance& inst);

 private:
  explicit SelectionPolicy(SelectorKind kind) : kind_(kind) {}

  SelectorKind kind_;
  std::shared_ptr<const SelectorParams> params_;
  std::mt19937_64 rng_;
};

}  // namespace isched

#endif  // ISCHED_SELECTION_HPP_
