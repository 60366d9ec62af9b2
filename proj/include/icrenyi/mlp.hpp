#pragma once

// Fully connected ReLU networks with hand-written reverse-mode gradients.
// Points are stored column-wise: a batch is a (dim x N) matrix.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace icrenyi {

/// Output nonlinearity. neg_abs and poly_softplus produce strictly negative
/// outputs, as required by the convex-conjugate objectives.
enum class FinalLayer { identity, neg_abs, poly_softplus };

std::string to_string(FinalLayer f);
FinalLayer final_layer_from_string(const std::string& s);

/// poly-softplus: -1/(1 - r) for r < 0, -(1 + r) for r >= 0. C^1 at 0.
double apply_final(FinalLayer f, double raw);
double final_derivative(FinalLayer f, double raw);
double final_second_derivative(FinalLayer f, double raw);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Parameters, or gradients with the same shapes.
using Parameters = std::vector<DenseLayer>;

Parameters zeros_like(const Parameters& p);
void add_scaled(Parameters& dst, const Parameters& src, double scale);
void scale(Parameters& p, double s);
bool all_finite(const Parameters& p);
std::size_t parameter_count(const Parameters& p);
/// Flattened copy (layer by layer, weight column-major then bias).
Eigen::VectorXd flatten(const Parameters& p);
void unflatten(Parameters& p, const Eigen::VectorXd& flat);

/// Cached activations of one forward pass.
struct Tape {
  std::vector<Eigen::MatrixXd> inputs;  // input to each affine layer; inputs[0] is x
  std::vector<Eigen::MatrixXd> pre;     // affine outputs; pre.back() is the raw output
};

class Mlp {
 public:
  /// He-uniform weights (bound sqrt(6 / fan_in)), zero biases.
  Mlp(std::vector<int> layer_sizes, FinalLayer final_layer, std::uint64_t seed);
  Mlp(std::vector<int> layer_sizes, FinalLayer final_layer, Parameters params);

  /// All weights and biases zero.
  static Mlp zeros(std::vector<int> layer_sizes, FinalLayer final_layer);

  [[nodiscard]] int input_dim() const { return sizes_.front(); }
  [[nodiscard]] int output_dim() const { return sizes_.back(); }
  [[nodiscard]] const std::vector<int>& layer_sizes() const { return sizes_; }
  [[nodiscard]] FinalLayer final_layer() const { return final_; }
  [[nodiscard]] const Parameters& params() const { return params_; }
  Parameters& params() { return params_; }

  /// Network output on a batch (output_dim x N). Throws on dimension mismatch.
  [[nodiscard]] Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Tape& tape) const;
  /// Scalar output at a single point.
  [[nodiscard]] double operator()(std::span<const double> x) const;

  /// Reverse pass for the scalar  sum_{k,j} upstream(k,j) * out(k,j).
  /// Gradients are accumulated into *param_grads (if non-null); input
  /// gradients (input_dim x N) are written to *input_grads (if non-null).
  void backward(const Tape& tape, const Eigen::MatrixXd& upstream, Parameters* param_grads,
                Eigen::MatrixXd* input_grads) const;

  /// Per-point gradient of a scalar-output network w.r.t. its input
  /// (input_dim x N). ReLU'(0) is taken as 0.
  [[nodiscard]] Eigen::MatrixXd grad_input(const Eigen::MatrixXd& x) const;

 private:
  std::vector<int> sizes_;
  FinalLayer final_;
  Parameters params_;
};

struct ParamGradient {
  double value = 0.0;
  Parameters grads;
  bool finite = true;  ///< false if the value or any gradient entry is NaN/Inf
};

/// Objective tail: maps network outputs (1 x N) to a scalar and writes
/// d value / d output into `d_out`.
using ObjectiveTail = std::function<double(const Eigen::RowVectorXd& out, Eigen::RowVectorXd& d_out)>;

/// Gradient of tail(f(batch)) w.r.t. every weight and bias of f.
ParamGradient grad_params(const Mlp& f, const Eigen::MatrixXd& batch, const ObjectiveTail& tail);

}  // namespace icrenyi
