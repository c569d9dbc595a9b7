#include "isched/qnet.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "isched/error.hpp"

namespace isched {

std::vector<ProcessId> GraphState::candidates() const {
  std::vector<ProcessId> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

bool GraphState::terminal() const { return std::none_of(mask.begin(), mask.end(), [](bool b) { return b; }); }

GraphState encode_state(const ProcessGraph& graph, int iteration) {
  GraphState s;
  const std::size_t n = graph.size();
  s.node_features.resize(static_cast<Eigen::Index>(n), kNodeFeatureDim);
  s.mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < kNodeFeatureDim; ++c) {
      s.node_features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = graph.node_features[i][c];
    }
    s.mask[i] = !graph.processes[i].scheduled();
  }
  s.edge_features.resize(static_cast<Eigen::Index>(graph.edges.size()), kEdgeFeatureDim);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    s.edges.emplace_back(graph.edges[e].a, graph.edges[e].b);
    for (std::size_t c = 0; c < kEdgeFeatureDim; ++c) {
      s.edge_features(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(c)) = graph.edges[e].features[c];
    }
  }
  s.iteration = iteration;
  return s;
}

nn::GraphInput to_network_input(const GraphState& state) {
  nn::GraphInput g;
  const std::size_t n = state.size();
  g.node_input = nn::signed_log1p(state.node_features);
  const Eigen::Index edges = static_cast<Eigen::Index>(state.edges.size());
  nn::Matrix directed(2 * edges, state.edge_features.cols());
  for (Eigen::Index e = 0; e < edges; ++e) {
    directed.row(2 * e) = state.edge_features.row(e);
    directed.row(2 * e + 1) = state.edge_features.row(e);
    if (directed.cols() > 4) std::swap(directed(2 * e + 1, 3), directed(2 * e + 1, 4));
  }
  g.edge_input = nn::signed_log1p(directed);
  g.neighbors.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) g.neighbors[i].emplace_back(static_cast<int>(i), -1);
  for (std::size_t e = 0; e < state.edges.size(); ++e) {
    auto [a, b] = state.edges[e];
    g.neighbors[a].emplace_back(static_cast<int>(b), static_cast<int>(2 * e));
    g.neighbors[b].emplace_back(static_cast<int>(a), static_cast<int>(2 * e + 1));
  }
  return g;
}

QNetworkParams QNetworkParams::init(const NetConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  QNetworkParams p;
  p.config = config;
  p.encoder = nn::GatEncoder::init(static_cast<int>(kNodeFeatureDim), config.hidden,
                                   static_cast<int>(kEdgeFeatureDim), config.layers, rng);
  p.head = nn::Mlp::init(2 * config.hidden, config.head_hidden, rng);
  return p;
}

QNetworkParams QNetworkParams::zeros_like() const {
  QNetworkParams p;
  p.config = config;
  p.encoder = encoder.zeros_like();
  p.head = head.zeros_like();
  return p;
}

std::vector<nn::TensorRef> QNetworkParams::tensors() {
  std::vector<nn::TensorRef> out;
  encoder.append_tensors("encoder.", out);
  head.append_tensors("head.", out);
  return out;
}

std::vector<nn::ConstTensorRef> QNetworkParams::tensors() const {
  std::vector<nn::ConstTensorRef> out;
  encoder.append_tensors("encoder.", out);
  head.append_tensors("head.", out);
  return out;
}

namespace {

nn::Vector head_input(const nn::Matrix& h, const nn::Vector& mean, Eigen::Index row) {
  nn::Vector x(h.cols() + mean.size());
  x.head(h.cols()) = h.row(row).transpose();
  x.tail(mean.size()) = mean;
  return x;
}

}  // namespace

nn::Matrix gat_forward(const QNetworkParams& params, const GraphState& state) {
  return nn::gat_encoder_forward(params.encoder, to_network_input(state));
}

std::vector<std::pair<ProcessId, double>> q_values(const QNetworkParams& params, const GraphState& state) {
  auto cands = state.candidates();
  if (cands.empty()) throw Error("no candidate processes to score");
  nn::Matrix h = gat_forward(params, state);
  nn::Vector mean = h.colwise().mean().transpose();
  std::vector<std::pair<ProcessId, double>> out;
  out.reserve(cands.size());
  for (ProcessId c : cands) {
    out.emplace_back(c, nn::mlp_forward(params.head, head_input(h, mean, static_cast<Eigen::Index>(c))));
  }
  return out;
}

ProcessId greedy_action(const QNetworkParams& params, const GraphState& state) {
  auto q = q_values(params, state);
  auto best = q.front();
  for (const auto& entry : q) {
    if (entry.second > best.second) best = entry;
  }
  return best.first;
}

double terminal_reward(const Rational& obj, const Rational& opt, double alpha) {
  if (obj <= Rational(0)) throw Error("terminal reward needs a positive objective, got " + obj.to_string());
  return alpha * (opt / obj).to_double();
}

ProcessId act_epsilon_greedy(const QNetworkParams& params, const GraphState& state, double epsilon,
                             std::mt19937_64& rng) {
  auto cands = state.candidates();
  if (cands.empty()) throw Error("no candidate processes to choose from");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  if (cands.size() == 1) return cands.front();
  if (u < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
    return cands[pick(rng)];
  }
  return greedy_action(params, state);
}

double td_target(const Transition& t, const QNetworkParams& target, double gamma) {
  if (t.terminal) return t.reward;
  if (t.next.terminal()) throw Error("non-terminal transition leads to a state without candidates");
  auto q = q_values(target, t.next);
  double best = q.front().second;
  for (const auto& entry : q) best = std::max(best, entry.second);
  return t.reward + gamma * best;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t k, std::mt19937_64& rng) const {
  const std::size_t n = items_.size();
  k = std::min(k, n);
  // Partial Fisher-Yates over the index range.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

namespace {

constexpr std::size_t kChunk = 16;

void accumulate(QNetworkParams& into, const QNetworkParams& from) {
  auto dst = into.tensors();
  auto src = from.tensors();
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].value += *src[i].value;
}

double chunk_loss(const QNetworkParams& params, const std::vector<TdSample>& batch, std::size_t lo,
                  std::size_t hi, QNetworkParams* grad) {
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t s = lo; s < hi; ++s) {
    const TdSample& sample = batch[s];
    if (sample.action >= sample.state->size()) throw Error("TD sample action out of range");
    nn::GraphInput input = to_network_input(*sample.state);
    nn::GatEncoderCache enc_cache;
    nn::Matrix h = nn::gat_encoder_forward(params.encoder, input, grad ? &enc_cache : nullptr);
    nn::Vector mean = h.colwise().mean().transpose();
    nn::MlpCache head_cache;
    const auto row = static_cast<Eigen::Index>(sample.action);
    const double q = nn::mlp_forward(params.head, head_input(h, mean, row), &head_cache);
    const double diff = q - sample.target;
    loss += diff * diff * scale;
    if (!grad) continue;
    nn::Vector d_in = nn::mlp_backward(params.head, head_cache, 2.0 * diff * scale, grad->head);
    const Eigen::Index width = h.cols();
    nn::Matrix d_h = nn::Matrix::Zero(h.rows(), width);
    d_h.rowwise() += d_in.tail(width).transpose() / static_cast<double>(h.rows());
    d_h.row(row) += d_in.head(width).transpose();
    nn::gat_encoder_backward(params.encoder, input, enc_cache, d_h, grad->encoder);
  }
  return loss;
}

}  // namespace

double td_loss(const QNetworkParams& params, const std::vector<TdSample>& batch, QNetworkParams* grad,
               unsigned threads) {
  if (batch.empty()) throw Error("empty TD batch");
  const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
  std::vector<double> losses(chunks, 0.0);
  std::vector<QNetworkParams> grads;
  if (grad) grads.assign(chunks, params.zeros_like());

  auto run = [&](std::size_t c) {
    std::size_t lo = c * kChunk;
    std::size_t hi = std::min(batch.size(), lo + kChunk);
    losses[c] = chunk_loss(params, batch, lo, hi, grad ? &grads[c] : nullptr);
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t c = next++; c < chunks; c = next++) run(c);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Reduce in chunk order so the result does not depend on the thread count.
  double loss = 0.0;
  for (double l : losses) loss += l;
  if (grad) {
    *grad = params.zeros_like();
    for (const auto& g : grads) accumulate(*grad, g);
  }
  return loss;
}

}  // namespace isched
