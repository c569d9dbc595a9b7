#include "isched/selection.hpp"

#include <algorithm>
#include <cmath>

#include "isched/error.hpp"

namespace isched {

CandidateFeatures candidate_features(const CandidateSolution& cand, const SubproblemSpec& spec,
                                     const ProcessGraph& graph, const Instance& inst) {
  CandidateFeatures z{};
  const auto costs = inst.cost_vector();
  const double total = inst.total_cost();
  const UsageProfile& local = cand.local;
  const Time span = local.span();

  if (span > 0 && total > 0.0) {
    std::vector<double> w(static_cast<std::size_t>(span), 0.0);
    for (std::size_t k = 0; k < local.num_resources(); ++k) {
      auto row = local.row(k);
      for (std::size_t t = 0; t < row.size(); ++t) w[t] += costs[k] * static_cast<double>(row[t]);
    }
    for (auto& x : w) x /= total;
    double sq = 0.0;
    double tv = 0.0;
    std::size_t peak_at = 0;
    for (std::size_t t = 0; t < w.size(); ++t) {
      sq += w[t] * w[t];
      if (t > 0) tv += std::abs(w[t] - w[t - 1]);
      if (w[t] > w[peak_at]) peak_at = t;
    }
    z[0] = std::sqrt(sq / static_cast<double>(w.size()));
    z[1] = tv;
    z[2] = w[peak_at];
    z[3] = z[2] > 0.0 ? static_cast<double>(peak_at) / static_cast<double>(span) : 0.0;
  }

  if (!cand.starts.empty()) {
    Time lo = cand.starts.front();
    Time hi = lo;
    double slack_sum = 0.0;
    Time slack_min = spec.tasks.front().latest_start() - cand.starts.front();
    for (std::size_t i = 0; i < cand.starts.size(); ++i) {
      const Task& t = spec.tasks[i];
      lo = std::min(lo, cand.starts[i]);
      hi = std::max(hi, cand.starts[i] + t.duration);
      Time slack = t.latest_start() - cand.starts[i];
      slack_sum += static_cast<double>(slack);
      slack_min = std::min(slack_min, slack);
    }
    std::size_t covered = 0;
    if (spec.process < graph.adjacency.size()) {
      for (Time t = lo; t < hi; ++t) {
        for (auto [nb, e] : graph.adjacency[spec.process]) {
          (void)e;
          const Process& p = graph.processes[nb];
          if (p.earliest_start <= t && t < p.latest_finish) {
            ++covered;
            break;
          }
        }
      }
    }
    z[4] = hi > lo ? static_cast<double>(covered) / static_cast<double>(hi - lo) : 0.0;
    z[5] = slack_sum / static_cast<double>(cand.starts.size());
    z[6] = static_cast<double>(slack_min);
  }

  if (total > 0.0) {
    double before = 0.0;
    double after = 0.0;
    for (std::size_t k = 0; k < spec.background.num_resources(); ++k) {
      before += costs[k] * static_cast<double>(spec.background.peak(k));
      after += costs[k] * static_cast<double>(cand.caps[k]);
    }
    z[7] = (after - before) / total;
  }
  return z;
}

SelectorParams SelectorParams::init(const NetConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SelectorParams p;
  p.config = config;
  p.encoder = nn::GatEncoder::init(static_cast<int>(kNodeFeatureDim), config.hidden,
                                   static_cast<int>(kEdgeFeatureDim), config.layers, rng);
  p.head = nn::Mlp::init(config.hidden + static_cast<int>(kCandidateFeatureDim), config.head_hidden, rng);
  return p;
}

SelectorParams SelectorParams::zeros_like() const {
  SelectorParams p;
  p.config = config;
  p.encoder = encoder.zeros_like();
  p.head = head.zeros_like();
  return p;
}

std::vector<nn::TensorRef> SelectorParams::tensors() {
  std::vector<nn::TensorRef> out;
  encoder.append_tensors("encoder.", out);
  head.append_tensors("head.", out);
  return out;
}

std::vector<nn::ConstTensorRef> SelectorParams::tensors() const {
  std::vector<nn::ConstTensorRef> out;
  encoder.append_tensors("encoder.", out);
  head.append_tensors("head.", out);
  return out;
}

namespace {

nn::Vector selector_input(const nn::Vector& hv, const CandidateFeatures& feats) {
  nn::Matrix z(1, static_cast<Eigen::Index>(kCandidateFeatureDim));
  for (std::size_t i = 0; i < kCandidateFeatureDim; ++i) z(0, static_cast<Eigen::Index>(i)) = feats[i];
  z = nn::signed_log1p(z);
  nn::Vector x(hv.size() + z.cols());
  x.head(hv.size()) = hv;
  x.tail(z.cols()) = z.row(0).transpose();
  return x;
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

nn::Vector graph_embedding(const SelectorParams& params, const GraphState& state) {
  if (state.size() == 0) throw Error("cannot embed an empty graph");
  nn::Matrix h = nn::gat_encoder_forward(params.encoder, to_network_input(state));
  return h.colwise().mean().transpose();
}

double score(const SelectorParams& params, const GraphState& state, const CandidateFeatures& feats) {
  return nn::mlp_forward(params.head, selector_input(graph_embedding(params, state), feats));
}

std::vector<double> score_all(const SelectorParams& params, const GraphState& state,
                              const std::vector<CandidateFeatures>& feats) {
  nn::Vector hv = graph_embedding(params, state);
  std::vector<double> out;
  out.reserve(feats.size());
  for (const auto& f : feats) out.push_back(nn::mlp_forward(params.head, selector_input(hv, f)));
  return out;
}

double rank_loss(const std::vector<double>& scores, const std::vector<Rational>& objectives) {
  if (scores.size() != objectives.size()) throw Error("scores and objectives differ in length");
  if (scores.size() < 2) throw Error("ranking loss needs at least two candidates");
  double loss = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    for (std::size_t k = 0; k < scores.size(); ++k) {
      if (objectives[j] < objectives[k]) loss += softplus(scores[j] - scores[k]);
    }
  }
  return loss;
}

std::vector<double> rank_loss_grad(const std::vector<double>& scores, const std::vector<Rational>& objectives) {
  if (scores.size() != objectives.size()) throw Error("scores and objectives differ in length");
  if (scores.size() < 2) throw Error("ranking loss needs at least two candidates");
  std::vector<double> d(scores.size(), 0.0);
  for (std::size_t j = 0; j < scores.size(); ++j) {
    for (std::size_t k = 0; k < scores.size(); ++k) {
      if (!(objectives[j] < objectives[k])) continue;
      double g = sigmoid(scores[j] - scores[k]);
      d[j] += g;
      d[k] -= g;
    }
  }
  return d;
}

double rank_loss_params(const SelectorParams& params, const GraphState& state,
                        const std::vector<CandidateFeatures>& feats, const std::vector<Rational>& objectives,
                        SelectorParams* grad) {
  nn::GraphInput input = to_network_input(state);
  nn::GatEncoderCache enc_cache;
  nn::Matrix h = nn::gat_encoder_forward(params.encoder, input, grad ? &enc_cache : nullptr);
  nn::Vector hv = h.colwise().mean().transpose();

  std::vector<double> scores;
  std::vector<nn::MlpCache> caches(feats.size());
  for (std::size_t j = 0; j < feats.size(); ++j) {
    scores.push_back(nn::mlp_forward(params.head, selector_input(hv, feats[j]), &caches[j]));
  }
  const double loss = rank_loss(scores, objectives);
  if (!grad) return loss;

  auto d_scores = rank_loss_grad(scores, objectives);
  nn::Vector d_hv = nn::Vector::Zero(hv.size());
  for (std::size_t j = 0; j < feats.size(); ++j) {
    if (d_scores[j] == 0.0) continue;
    nn::Vector d_in = nn::mlp_backward(params.head, caches[j], d_scores[j], grad->head);
    d_hv += d_in.head(hv.size());
  }
  nn::Matrix d_h(h.rows(), h.cols());
  d_h.rowwise() = d_hv.transpose() / static_cast<double>(h.rows());
  nn::gat_encoder_backward(params.encoder, input, enc_cache, d_h, grad->encoder);
  return loss;
}

Rational total_variation_cost(const UsageProfile& combined, const std::vector<ResourceKind>& resources) {
  Rational total(0);
  for (std::size_t k = 0; k < combined.num_resources(); ++k) {
    auto row = combined.row(k);
    Units tv = 0;
    for (std::size_t t = 1; t < row.size(); ++t) tv += std::abs(row[t] - row[t - 1]);
    total = total + resources[k].unit_cost * Rational(tv);
  }
  return total;
}

Rational mean_abs_difference_cost(const UsageProfile& combined, const std::vector<ResourceKind>& resources) {
  if (combined.span() < 2) return Rational(0);
  return total_variation_cost(combined, resources) / Rational(combined.span() - 1);
}

Time completion_time(const CandidateSolution& cand, const SubproblemSpec& spec) {
  Time finish = spec.window_begin;
  for (std::size_t i = 0; i < cand.starts.size(); ++i) finish = std::max(finish, cand.starts[i] + spec.tasks[i].duration);
  return finish;
}

SelectionPolicy SelectionPolicy::learned(std::shared_ptr<const SelectorParams> params) {
  if (!params) throw Error("learned selector needs parameters");
  SelectionPolicy p(SelectorKind::kLearned);
  p.params_ = std::move(params);
  return p;
}

SelectionPolicy SelectionPolicy::mad() { return SelectionPolicy(SelectorKind::kMad); }
SelectionPolicy SelectionPolicy::tv() { return SelectionPolicy(SelectorKind::kTv); }
SelectionPolicy SelectionPolicy::mct() { return SelectionPolicy(SelectorKind::kMct); }

SelectionPolicy SelectionPolicy::random(std::uint64_t seed) {
  SelectionPolicy p(SelectorKind::kRandom);
  p.rng_.seed(seed);
  return p;
}

SelectionPolicy SelectionPolicy::from_name(const std::string& name, std::uint64_t seed,
                                           std::shared_ptr<const SelectorParams> params) {
  if (name == "learned") return learned(std::move(params));
  if (name == "mad") return mad();
  if (name == "tv") return tv();
  if (name == "mct") return mct();
  if (name == "rand" || name == "rand-ls") return random(seed);
  throw Error("unknown selector '" + name + "'");
}

std::string SelectionPolicy::name() const {
  switch (kind_) {
    case SelectorKind::kLearned:
      return "learned";
    case SelectorKind::kMad:
      return "mad";
    case SelectorKind::kTv:
      return "tv";
    case SelectorKind::kMct:
      return "mct";
    case SelectorKind::kRandom:
      return "rand";
  }
  return "?";
}

std::size_t SelectionPolicy::select(const std::vector<CandidateSolution>& candidates, const SubproblemSpec& spec,
                                    const GraphState& state, const ProcessGraph& graph, const Instance& inst) {
  if (candidates.empty()) throw Error("no candidate solutions to select from");
  if (kind_ == SelectorKind::kRandom) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return pick(rng_);
  }
  if (candidates.size() == 1) return 0;

  std::size_t best = 0;
  switch (kind_) {
    case SelectorKind::kLearned: {
      std::vector<CandidateFeatures> feats;
      for (const auto& c : candidates) feats.push_back(candidate_features(c, spec, graph, inst));
      auto s = score_all(*params_, state, feats);
      for (std::size_t j = 1; j < s.size(); ++j) {
        if (s[j] < s[best]) best = j;
      }
      break;
    }
    case SelectorKind::kMad:
    case SelectorKind::kTv: {
      std::vector<Rational> value;
      for (const auto& c : candidates) {
        UsageProfile combined = spec.background + c.local;
        value.push_back(kind_ == SelectorKind::kTv ? total_variation_cost(combined, spec.resources)
                                                   : mean_abs_difference_cost(combined, spec.resources));
      }
      for (std::size_t j = 1; j < value.size(); ++j) {
        if (value[j] < value[best]) best = j;
      }
      break;
    }
    case SelectorKind::kMct: {
      Time best_finish = completion_time(candidates[0], spec);
      for (std::size_t j = 1; j < candidates.size(); ++j) {
        Time f = completion_time(candidates[j], spec);
        if (f < best_finish) {
          best_finish = f;
          best = j;
        }
      }
      break;
    }
    case SelectorKind::kRandom:
      break;
  }
  return best;
}

}  // namespace isched
