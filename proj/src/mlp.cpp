#include "icrenyi/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "icrenyi/rng.hpp"

namespace icrenyi {

std::string to_string(FinalLayer f) {
  switch (f) {
    case FinalLayer::identity:
      return "identity";
    case FinalLayer::neg_abs:
      return "neg_abs";
    case FinalLayer::poly_softplus:
      return "poly_softplus";
  }
  return "identity";
}

FinalLayer final_layer_from_string(const std::string& s) {
  if (s == "identity") return FinalLayer::identity;
  if (s == "neg_abs") return FinalLayer::neg_abs;
  if (s == "poly_softplus") return FinalLayer::poly_softplus;
  throw std::invalid_argument("unknown final layer '" + s + "'");
}

double apply_final(FinalLayer f, double raw) {
  switch (f) {
    case FinalLayer::identity:
      return raw;
    case FinalLayer::neg_abs:
      return -std::abs(raw);
    case FinalLayer::poly_softplus:
      return raw < 0.0 ? -1.0 / (1.0 - raw) : -(1.0 + raw);
  }
  return raw;
}

double final_derivative(FinalLayer f, double raw) {
  switch (f) {
    case FinalLayer::identity:
      return 1.0;
    case FinalLayer::neg_abs:
      return raw > 0.0 ? -1.0 : (raw < 0.0 ? 1.0 : 0.0);
    case FinalLayer::poly_softplus: {
      if (raw >= 0.0) return -1.0;
      const double d = 1.0 - raw;
      return -1.0 / (d * d);
    }
  }
  return 1.0;
}

double final_second_derivative(FinalLayer f, double raw) {
  if (f == FinalLayer::poly_softplus && raw < 0.0) {
    const double d = 1.0 - raw;
    return -2.0 / (d * d * d);
  }
  return 0.0;
}

Parameters zeros_like(const Parameters& p) {
  Parameters out;
  out.reserve(p.size());
  for (const auto& l : p)
    out.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
  return out;
}

void add_scaled(Parameters& dst, const Parameters& src, double s) {
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i].weight += s * src[i].weight;
    dst[i].bias += s * src[i].bias;
  }
}

void scale(Parameters& p, double s) {
  for (auto& l : p) {
    l.weight *= s;
    l.bias *= s;
  }
}

bool all_finite(const Parameters& p) {
  for (const auto& l : p)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

std::size_t parameter_count(const Parameters& p) {
  std::size_t n = 0;
  for (const auto& l : p) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd flatten(const Parameters& p) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count(p)));
  Eigen::Index k = 0;
  for (const auto& l : p) {
    flat.segment(k, l.weight.size()) = l.weight.reshaped();
    k += l.weight.size();
    flat.segment(k, l.bias.size()) = l.bias;
    k += l.bias.size();
  }
  return flat;
}

void unflatten(Parameters& p, const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count(p)))
    throw std::invalid_argument("unflatten: size mismatch");
  Eigen::Index k = 0;
  for (auto& l : p) {
    l.weight.reshaped() = flat.segment(k, l.weight.size());
    k += l.weight.size();
    l.bias = flat.segment(k, l.bias.size());
    k += l.bias.size();
  }
}

namespace {

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("an MLP needs at least input and output sizes");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes, FinalLayer final_layer, std::uint64_t seed)
    : sizes_(std::move(layer_sizes)), final_(final_layer) {
  check_sizes(sizes_);
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int fan_in = sizes_[l];
    const double bound = std::sqrt(6.0 / fan_in);
    DenseLayer layer{Eigen::MatrixXd(sizes_[l + 1], fan_in), Eigen::VectorXd::Zero(sizes_[l + 1])};
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = rng.uniform(-bound, bound);
    params_.push_back(std::move(layer));
  }
}

Mlp::Mlp(std::vector<int> layer_sizes, FinalLayer final_layer, Parameters params)
    : sizes_(std::move(layer_sizes)), final_(final_layer), params_(std::move(params)) {
  check_sizes(sizes_);
  if (params_.size() + 1 != sizes_.size()) throw std::invalid_argument("layer count does not match sizes");
  for (std::size_t l = 0; l < params_.size(); ++l) {
    if (params_[l].weight.rows() != sizes_[l + 1] || params_[l].weight.cols() != sizes_[l] ||
        params_[l].bias.size() != sizes_[l + 1])
      throw std::invalid_argument("parameter shapes do not match layer sizes");
  }
}

Mlp Mlp::zeros(std::vector<int> layer_sizes, FinalLayer final_layer) {
  check_sizes(layer_sizes);
  Parameters p;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    p.push_back({Eigen::MatrixXd::Zero(layer_sizes[l + 1], layer_sizes[l]), Eigen::VectorXd::Zero(layer_sizes[l + 1])});
  return Mlp(std::move(layer_sizes), final_layer, std::move(p));
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Tape& tape) const {
  if (x.rows() != input_dim())
    throw std::invalid_argument("input dimension " + std::to_string(x.rows()) + " does not match network input " +
                                std::to_string(input_dim()));
  const std::size_t layers = params_.size();
  tape.inputs.resize(layers);
  tape.pre.resize(layers);
  tape.inputs[0] = x;
  for (std::size_t l = 0; l < layers; ++l) {
    // Written in place so a reused tape does not reallocate.
    tape.pre[l].resize(params_[l].weight.rows(), x.cols());
    tape.pre[l].noalias() = params_[l].weight * tape.inputs[l];
    tape.pre[l].colwise() += params_[l].bias;
    if (l + 1 < layers) tape.inputs[l + 1] = tape.pre[l].cwiseMax(0.0);
  }
  const FinalLayer f = final_;
  return tape.pre.back().unaryExpr([f](double r) { return apply_final(f, r); });
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Tape tape;
  return forward(x, tape);
}

double Mlp::operator()(std::span<const double> x) const {
  if (output_dim() != 1) throw std::invalid_argument("scalar evaluation needs a single output");
  const Eigen::MatrixXd in = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return forward(in)(0, 0);
}

void Mlp::backward(const Tape& tape, const Eigen::MatrixXd& upstream, Parameters* param_grads,
                   Eigen::MatrixXd* input_grads) const {
  const std::size_t layers = params_.size();
  const FinalLayer f = final_;
  if (upstream.rows() != tape.pre.back().rows() || upstream.cols() != tape.pre.back().cols())
    throw std::invalid_argument("upstream gradient shape mismatch");
  if (param_grads && param_grads->size() != layers) *param_grads = zeros_like(params_);

  // Scratch buffers persist per thread; batches keep the same shape across
  // training steps, so steady state does no allocation.
  thread_local Eigen::MatrixXd delta, back;
  delta = upstream.cwiseProduct(tape.pre.back().unaryExpr([f](double r) { return final_derivative(f, r); }));
  for (std::size_t l = layers; l-- > 0;) {
    if (param_grads) {
      (*param_grads)[l].weight.noalias() += delta * tape.inputs[l].transpose();
      (*param_grads)[l].bias += delta.rowwise().sum();
    }
    if (l == 0 && !input_grads) break;
    back.resize(params_[l].weight.cols(), delta.cols());
    back.noalias() = params_[l].weight.transpose() * delta;
    if (l == 0) {
      *input_grads = back;
      break;
    }
    delta.resize(back.rows(), back.cols());
    delta = (tape.pre[l - 1].array() > 0.0).select(back, 0.0);
  }
}

Eigen::MatrixXd Mlp::grad_input(const Eigen::MatrixXd& x) const {
  if (output_dim() != 1) throw std::invalid_argument("grad_input needs a scalar-output network");
  Tape tape;
  forward(x, tape);
  Eigen::MatrixXd g;
  backward(tape, Eigen::MatrixXd::Ones(1, x.cols()), nullptr, &g);
  return g;
}

ParamGradient grad_params(const Mlp& f, const Eigen::MatrixXd& batch, const ObjectiveTail& tail) {
  if (batch.cols() == 0) throw std::invalid_argument("grad_params needs a nonempty batch");
  if (f.output_dim() != 1) throw std::invalid_argument("grad_params needs a scalar-output network");
  Tape tape;
  const Eigen::RowVectorXd out = f.forward(batch, tape);
  Eigen::RowVectorXd d_out = Eigen::RowVectorXd::Zero(out.size());
  ParamGradient result;
  result.value = tail(out, d_out);
  result.grads = zeros_like(f.params());
  f.backward(tape, d_out, &result.grads, nullptr);
  result.finite = std::isfinite(result.value) && all_finite(result.grads);
  return result;
}

}  // namespace icrenyi
