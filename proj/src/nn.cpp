#include "isched/nn.hpp"

#include <algorithm>
#include <cmath>

#include "isched/error.hpp"

namespace isched::nn {

namespace {

Matrix glorot(int rows, int cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = dist(rng);
  }
  return m;
}

inline double leaky(double z) { return z > 0.0 ? z : kLeakySlope * z; }
inline double leaky_grad(double z) { return z > 0.0 ? 1.0 : kLeakySlope; }

}  // namespace

Matrix signed_log1p(const Matrix& x) {
  return x.unaryExpr([](double v) { return v >= 0.0 ? std::log1p(v) : -std::log1p(-v); });
}

// ---------------------------------------------------------------------------
// GATv2 layer

GatLayer GatLayer::init(int in_dim, int out_dim, int edge_dim, std::mt19937_64& rng) {
  GatLayer l;
  l.theta_a = glorot(out_dim, in_dim, rng);
  l.theta_b = glorot(out_dim, in_dim, rng);
  l.theta_e = glorot(out_dim, edge_dim, rng);
  l.attn = glorot(out_dim, 1, rng);
  return l;
}

GatLayer GatLayer::zeros_like() const {
  GatLayer l;
  l.theta_a = Matrix::Zero(theta_a.rows(), theta_a.cols());
  l.theta_b = Matrix::Zero(theta_b.rows(), theta_b.cols());
  l.theta_e = Matrix::Zero(theta_e.rows(), theta_e.cols());
  l.attn = Matrix::Zero(attn.rows(), attn.cols());
  return l;
}

Matrix gat_layer_forward(const GatLayer& layer, const GraphInput& graph, const Matrix& input,
                         GatLayerCache* cache) {
  const Eigen::Index n = input.rows();
  if (input.cols() != layer.theta_a.cols() || static_cast<std::size_t>(n) != graph.neighbors.size()) {
    throw Error("attention layer input shape mismatch");
  }
  if (graph.edge_input.rows() > 0 && graph.edge_input.cols() != layer.theta_e.cols()) {
    throw Error("attention layer edge feature shape mismatch");
  }
  const Eigen::Index out_dim = layer.theta_a.rows();
  RowMatrix proj_a = input * layer.theta_a.transpose();
  RowMatrix proj_b = input * layer.theta_b.transpose();
  RowMatrix proj_e = graph.edge_input.rows() > 0 ? RowMatrix(graph.edge_input * layer.theta_e.transpose())
                                                 : RowMatrix(0, out_dim);
  const Eigen::RowVectorXd attn = layer.attn.col(0).transpose();

  Eigen::Index total = 0;
  for (const auto& slots : graph.neighbors) total += static_cast<Eigen::Index>(slots.size());
  RowMatrix pre(total, out_dim);
  RowMatrix out(n, out_dim);
  out.setZero();
  if (cache) cache->attention.assign(static_cast<std::size_t>(n), Vector());
  Vector logits;
  Eigen::Index offset = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& slots = graph.neighbors[static_cast<std::size_t>(i)];
    const auto m = static_cast<Eigen::Index>(slots.size());
    logits.resize(m);
    for (Eigen::Index s = 0; s < m; ++s) {
      auto [j, e] = slots[static_cast<std::size_t>(s)];
      auto z = pre.row(offset + s);
      z = proj_b.row(i) + proj_a.row(j);
      if (e >= 0) z += proj_e.row(e);
      logits(s) = z.unaryExpr([](double v) { return leaky(v); }).dot(attn);
    }
    const double top = logits.maxCoeff();
    Vector beta = (logits.array() - top).exp();
    beta /= beta.sum();
    for (Eigen::Index s = 0; s < m; ++s) out.row(i) += beta(s) * proj_a.row(slots[static_cast<std::size_t>(s)].first);
    if (cache) cache->attention[static_cast<std::size_t>(i)] = std::move(beta);
    offset += m;
  }
  if (cache) {
    cache->input = input;
    cache->proj_a = std::move(proj_a);
    cache->proj_b = std::move(proj_b);
    cache->proj_e = std::move(proj_e);
    cache->pre_act = std::move(pre);
  }
  return out;
}

Matrix gat_layer_backward(const GatLayer& layer, const GraphInput& graph, const GatLayerCache& cache,
                          const Matrix& d_output, GatLayer& grad) {
  const Eigen::Index n = cache.input.rows();
  const Eigen::Index out_dim = layer.theta_a.rows();
  const Eigen::RowVectorXd attn = layer.attn.col(0).transpose();

  RowMatrix d_proj_a = RowMatrix::Zero(n, out_dim);
  RowMatrix d_proj_b = RowMatrix::Zero(n, out_dim);
  RowMatrix d_proj_e = RowMatrix::Zero(cache.proj_e.rows(), out_dim);
  Eigen::RowVectorXd d_attn = Eigen::RowVectorXd::Zero(out_dim);
  Eigen::RowVectorXd d_out(out_dim), d_z(out_dim);
  Vector d_beta;

  Eigen::Index offset = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& slots = graph.neighbors[static_cast<std::size_t>(i)];
    const auto m = static_cast<Eigen::Index>(slots.size());
    const Vector& beta = cache.attention[static_cast<std::size_t>(i)];
    d_out = d_output.row(i);
    d_beta.resize(m);
    for (Eigen::Index s = 0; s < m; ++s) {
      const int j = slots[static_cast<std::size_t>(s)].first;
      d_beta(s) = d_out.dot(cache.proj_a.row(j));
      d_proj_a.row(j) += beta(s) * d_out;
    }
    const double weighted = beta.dot(d_beta);
    for (Eigen::Index s = 0; s < m; ++s) {
      auto [j, e] = slots[static_cast<std::size_t>(s)];
      const double d_logit = beta(s) * (d_beta(s) - weighted);
      const auto z = cache.pre_act.row(offset + s);
      d_attn += d_logit * z.unaryExpr([](double v) { return leaky(v); });
      d_z = d_logit * attn.cwiseProduct(z.unaryExpr([](double v) { return leaky_grad(v); }));
      d_proj_b.row(i) += d_z;
      d_proj_a.row(j) += d_z;
      if (e >= 0) d_proj_e.row(e) += d_z;
    }
    offset += m;
  }

  grad.theta_a += d_proj_a.transpose() * cache.input;
  grad.theta_b += d_proj_b.transpose() * cache.input;
  if (graph.edge_input.rows() > 0) grad.theta_e += d_proj_e.transpose() * graph.edge_input;
  grad.attn.col(0) += d_attn.transpose();
  return d_proj_a * layer.theta_a + d_proj_b * layer.theta_b;
}

// ---------------------------------------------------------------------------
// Encoder

GatEncoder GatEncoder::init(int in_dim, int hidden, int edge_dim, int num_layers, std::mt19937_64& rng) {
  GatEncoder enc;
  for (int l = 0; l < num_layers; ++l) enc.layers.push_back(GatLayer::init(l == 0 ? in_dim : hidden, hidden, edge_dim, rng));
  return enc;
}

GatEncoder GatEncoder::zeros_like() const {
  GatEncoder enc;
  for (const auto& l : layers) enc.layers.push_back(l.zeros_like());
  return enc;
}

void GatEncoder::append_tensors(const std::string& prefix, std::vector<TensorRef>& out) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = prefix + "layer" + std::to_string(l) + ".";
    out.push_back({p + "theta_a", &layers[l].theta_a});
    out.push_back({p + "theta_b", &layers[l].theta_b});
    out.push_back({p + "theta_e", &layers[l].theta_e});
    out.push_back({p + "attn", &layers[l].attn});
  }
}

void GatEncoder::append_tensors(const std::string& prefix, std::vector<ConstTensorRef>& out) const {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = prefix + "layer" + std::to_string(l) + ".";
    out.push_back({p + "theta_a", &layers[l].theta_a});
    out.push_back({p + "theta_b", &layers[l].theta_b});
    out.push_back({p + "theta_e", &layers[l].theta_e});
    out.push_back({p + "attn", &layers[l].attn});
  }
}

Matrix gat_encoder_forward(const GatEncoder& enc, const GraphInput& graph, GatEncoderCache* cache) {
  if (cache) {
    cache->layers.assign(enc.layers.size(), {});
    cache->outputs.assign(enc.layers.size(), {});
  }
  Matrix h = graph.node_input;
  for (std::size_t l = 0; l < enc.layers.size(); ++l) {
    Matrix out = gat_layer_forward(enc.layers[l], graph, h, cache ? &cache->layers[l] : nullptr);
    if (l + 1 < enc.layers.size()) {
      h = out.cwiseMax(0.0);
    } else {
      h = out;
    }
    if (cache) cache->outputs[l] = std::move(out);
  }
  return h;
}

void gat_encoder_backward(const GatEncoder& enc, const GraphInput& graph, const GatEncoderCache& cache,
                          const Matrix& d_output, GatEncoder& grad) {
  Matrix d = d_output;
  for (std::size_t l = enc.layers.size(); l-- > 0;) {
    if (l + 1 < enc.layers.size()) {
      d = d.cwiseProduct(cache.outputs[l].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    }
    d = gat_layer_backward(enc.layers[l], graph, cache.layers[l], d, grad.layers[l]);
  }
}

// ---------------------------------------------------------------------------
// MLP

Mlp Mlp::init(int in_dim, int hidden, std::mt19937_64& rng) {
  Mlp m;
  m.w1 = glorot(hidden, in_dim, rng);
  m.b1 = Matrix::Zero(hidden, 1);
  m.w2 = glorot(1, hidden, rng);
  m.b2 = Matrix::Zero(1, 1);
  return m;
}

Mlp Mlp::zeros_like() const {
  Mlp m;
  m.w1 = Matrix::Zero(w1.rows(), w1.cols());
  m.b1 = Matrix::Zero(b1.rows(), 1);
  m.w2 = Matrix::Zero(1, w2.cols());
  m.b2 = Matrix::Zero(1, 1);
  return m;
}

void Mlp::append_tensors(const std::string& prefix, std::vector<TensorRef>& out) {
  out.push_back({prefix + "w1", &w1});
  out.push_back({prefix + "b1", &b1});
  out.push_back({prefix + "w2", &w2});
  out.push_back({prefix + "b2", &b2});
}

void Mlp::append_tensors(const std::string& prefix, std::vector<ConstTensorRef>& out) const {
  out.push_back({prefix + "w1", &w1});
  out.push_back({prefix + "b1", &b1});
  out.push_back({prefix + "w2", &w2});
  out.push_back({prefix + "b2", &b2});
}

double mlp_forward(const Mlp& mlp, const Vector& input, MlpCache* cache) {
  if (input.size() != mlp.w1.cols()) throw Error("perceptron input shape mismatch");
  Vector pre = mlp.w1 * input + mlp.b1.col(0);
  double out = mlp.w2.row(0).dot(pre.cwiseMax(0.0)) + mlp.b2(0, 0);
  if (cache) {
    cache->input = input;
    cache->hidden_pre = std::move(pre);
  }
  return out;
}

Vector mlp_backward(const Mlp& mlp, const MlpCache& cache, double d_out, Mlp& grad) {
  Vector hidden = cache.hidden_pre.cwiseMax(0.0);
  grad.b2(0, 0) += d_out;
  grad.w2.row(0) += d_out * hidden.transpose();
  Vector d_pre = d_out * mlp.w2.row(0).transpose();
  for (Eigen::Index i = 0; i < d_pre.size(); ++i) {
    if (cache.hidden_pre(i) <= 0.0) d_pre(i) = 0.0;
  }
  grad.w1 += d_pre * cache.input.transpose();
  grad.b1.col(0) += d_pre;
  return mlp.w1.transpose() * d_pre;
}

// ---------------------------------------------------------------------------
// Adam

void Adam::step(const std::vector<TensorRef>& params, const std::vector<ConstTensorRef>& grads) {
  if (params.size() != grads.size()) throw Error("optimizer parameter/gradient count mismatch");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = *grads[i].value;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    Matrix m_hat = m_[i] / c1;
    Matrix v_hat = v_[i] / c2;
    *params[i].value -= lr_ * m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + eps_).matrix());
  }
}

double max_relative_error(const Matrix& a, const Matrix& b, double floor) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double x = a.data()[i];
    double y = b.data()[i];
    double denom = std::max(floor, std::max(std::abs(x), std::abs(y)));
    worst = std::max(worst, std::abs(x - y) / denom);
  }
  return worst;
}

}  // namespace isched::nn
