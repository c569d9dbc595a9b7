#ifndef ISCHED_NN_HPP_
#define ISCHED_NN_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace isched::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kLeakySlope = 0.2;

/// Named view of one learnable tensor; biases and vectors are n×1 matrices.
struct TensorRef {
  std::string name;
  Matrix* value;
};
struct ConstTensorRef {
  std::string name;
  const Matrix* value;
};

/// sign(x)·log(1 + |x|), applied elementwise to raw state features so that
/// times, durations and utilisation ratios land on comparable scales.
Matrix signed_log1p(const Matrix& x);

/// Graph in the form the attention layers consume. Row i of `node_input`
/// is node i; `neighbors[i]` lists (j, edge row) including the self loop
/// (i, -1), whose edge features are the zero vector.
struct GraphInput {
  Matrix node_input;
  Matrix edge_input;  // one row per directed edge
  std::vector<std::vector<std::pair<int, int>>> neighbors;
};

/// One GATv2 layer:
///   v'_i   = Σ_{j ∈ N(i) ∪ {i}} β_ij Θ_a v_j
///   β_ij   = softmax_j( aᵀ LeakyReLU(Θ_b v_i + Θ_a v_j + Θ_e e_ij) )
struct GatLayer {
  Matrix theta_a;  // out × in
  Matrix theta_b;  // out × in
  Matrix theta_e;  // out × edge_dim
  Matrix attn;     // out × 1

  static GatLayer init(int in_dim, int out_dim, int edge_dim, std::mt19937_64& rng);
  GatLayer zeros_like() const;
};

struct GatLayerCache {
  Matrix input;      // n × in
  RowMatrix proj_a;  // n × out, rows Θ_a v_j
  RowMatrix proj_b;  // n × out, rows Θ_b v_i
  RowMatrix proj_e;  // E × out, rows Θ_e e
  RowMatrix pre_act;  // one row z_ij per neighbor slot, nodes in order
  std::vector<Vector> attention;  // β_i· per node
};

Matrix gat_layer_forward(const GatLayer& layer, const GraphInput& graph, const Matrix& input,
                         GatLayerCache* cache = nullptr);

/// Accumulates parameter gradients into `grad` and returns dL/d input.
Matrix gat_layer_backward(const GatLayer& layer, const GraphInput& graph, const GatLayerCache& cache,
                          const Matrix& d_output, GatLayer& grad);

/// Stack of GATv2 layers with ReLU between consecutive layers.
struct GatEncoder {
  std::vector<GatLayer> layers;

  static GatEncoder init(int in_dim, int hidden, int edge_dim, int num_layers, std::mt19937_64& rng);
  GatEncoder zeros_like() const;
  void append_tensors(const std::string& prefix, std::vector<TensorRef>& out);
  void append_tensors(const std::string& prefix, std::vector<ConstTensorRef>& out) const;
};

struct GatEncoderCache {
  std::vector<GatLayerCache> layers;
  std::vector<Matrix> outputs;  // pre-activation output of each layer
};

Matrix gat_encoder_forward(const GatEncoder& enc, const GraphInput& graph, GatEncoderCache* cache = nullptr);
void gat_encoder_backward(const GatEncoder& enc, const GraphInput& graph, const GatEncoderCache& cache,
                          const Matrix& d_output, GatEncoder& grad);

/// Two-layer perceptron with ReLU hidden units and a scalar output.
struct Mlp {
  Matrix w1;  // hidden × in
  Matrix b1;  // hidden × 1
  Matrix w2;  // 1 × hidden
  Matrix b2;  // 1 × 1

  static Mlp init(int in_dim, int hidden, std::mt19937_64& rng);
  Mlp zeros_like() const;
  void append_tensors(const std::string& prefix, std::vector<TensorRef>& out);
  void append_tensors(const std::string& prefix, std::vector<ConstTensorRef>& out) const;
};

struct MlpCache {
  Vector input;
  Vector hidden_pre;
};

double mlp_forward(const Mlp& mlp, const Vector& input, MlpCache* cache = nullptr);
/// Accumulates d_out · ∂f/∂θ into `grad` and returns d_out · ∂f/∂input.
Vector mlp_backward(const Mlp& mlp, const MlpCache& cache, double d_out, Mlp& grad);

/// Adaptive moment estimation over an ordered tensor list.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<TensorRef>& params, const std::vector<ConstTensorRef>& grads);
  std::int64_t steps() const { return t_; }

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  std::int64_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

/// Elementwise max |a - b| / max(1e-8, |a| + |b|) style relative error used by
/// the gradient checks.
double max_relative_error(const Matrix& a, const Matrix& b, double floor = 1e-8);

}  // namespace isched::nn

#endif  // ISCHED_NN_HPP_
