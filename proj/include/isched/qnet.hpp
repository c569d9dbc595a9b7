#ifndef ISCHED_QNET_HPP_
#define ISCHED_QNET_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <random>
#include <utility>
#include <vector>

#include "isched/decomposition.hpp"
#include "isched/nn.hpp"
#include "isched/rational.hpp"

namespace isched {

/// Dense snapshot of the process graph handed to the networks.
struct GraphState {
  nn::Matrix node_features;  // n × 4, raw
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // a < b
  nn::Matrix edge_features;  // |edges| × 7, oriented a→b
  std::vector<bool> mask;    // true for unscheduled processes
  int iteration = 0;

  std::size_t size() const { return mask.size(); }
  std::vector<ProcessId> candidates() const;
  bool terminal() const;
};

GraphState encode_state(const ProcessGraph& graph, int iteration);

/// Applies signed_log1p to the features and expands every undirected edge
/// into both directions plus one self loop per node.
nn::GraphInput to_network_input(const GraphState& state);

struct NetConfig {
  int hidden = 64;
  int layers = 2;
  int head_hidden = 64;
};

/// GATv2 encoder followed by a head over [h_i ‖ mean_j h_j].
struct QNetworkParams {
  NetConfig config;
  nn::GatEncoder encoder;
  nn::Mlp head;

  static QNetworkParams init(const NetConfig& config, std::uint64_t seed);
  QNetworkParams zeros_like() const;
  std::vector<nn::TensorRef> tensors();
  std::vector<nn::ConstTensorRef> tensors() const;
};

/// Final-layer node embeddings.
nn::Matrix gat_forward(const QNetworkParams& params, const GraphState& state);

/// Q(x, P) for every candidate, ascending process id.
std::vector<std::pair<ProcessId, double>> q_values(const QNetworkParams& params, const GraphState& state);

/// Greedy choice; ties go to the smaller id.
ProcessId greedy_action(const QNetworkParams& params, const GraphState& state);

/// α·OPT/Obj. Throws for obj ≤ 0.
double terminal_reward(const Rational& obj, const Rational& opt, double alpha);

ProcessId act_epsilon_greedy(const QNetworkParams& params, const GraphState& state, double epsilon,
                             std::mt19937_64& rng);

struct Transition {
  GraphState state;
  ProcessId action = 0;
  double reward = 0.0;
  GraphState next;
  bool terminal = false;
};

/// y = r for terminal transitions, r + γ max_P Q_target(x', P) otherwise.
double td_target(const Transition& t, const QNetworkParams& target, double gamma);

/// Fixed-capacity ring; the oldest transition is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return items_[i]; }

  /// min(k, size) distinct indices drawn uniformly.
  std::vector<std::size_t> sample(std::size_t k, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

struct TdSample {
  const GraphState* state = nullptr;
  ProcessId action = 0;
  double target = 0.0;
};

/// Mean squared TD error over the batch. When `grad` is given it receives
/// the gradient (it must be shaped like `params`, values are overwritten).
double td_loss(const QNetworkParams& params, const std::vector<TdSample>& batch, QNetworkParams* grad = nullptr,
               unsigned threads = 1);

}  // namespace isched

#endif  // ISCHED_QNET_HPP_
