#include "icrenyi/penalty.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace icrenyi {

void PenaltySpec::validate() const {
  if (!(weight >= 0.0)) throw std::invalid_argument("penalty weight must be >= 0");
  if (!(lipschitz > 0.0)) throw std::invalid_argument("penalty Lipschitz target must be > 0");
}

Eigen::MatrixXd penalty_points(const Eigen::MatrixXd& p_batch, const Eigen::MatrixXd& q_batch,
                               PenaltySampling sampling, Rng& rng) {
  if (p_batch.rows() != q_batch.rows()) throw std::invalid_argument("penalty batches differ in dimension");
  if (sampling == PenaltySampling::data_points) {
    Eigen::MatrixXd out(p_batch.rows(), p_batch.cols() + q_batch.cols());
    out << p_batch, q_batch;
    return out;
  }
  const Eigen::Index n = std::min(p_batch.cols(), q_batch.cols());
  // Shuffle the Q side so each step pairs points differently.
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(q_batch.cols()));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
  Eigen::MatrixXd out(p_batch.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double t = rng.uniform();
    out.col(j) = t * p_batch.col(j) + (1.0 - t) * q_batch.col(perm[static_cast<std::size_t>(j)]);
  }
  return out;
}

double gradient_penalty(const Mlp& f, const Eigen::MatrixXd& points, const PenaltySpec& spec, Parameters* grads,
                        double sign) {
  spec.validate();
  if (f.output_dim() != 1) throw std::invalid_argument("gradient penalty needs a scalar-output network");
  if (spec.weight == 0.0 || points.cols() == 0) return 0.0;

  const Parameters& params = f.params();
  const std::size_t layers = params.size();
  const Eigen::Index n_pts = points.cols();
  const FinalLayer fl = f.final_layer();

  Tape tape;
  f.forward(points, tape);
  const Eigen::RowVectorXd raw = tape.pre.back().row(0);

  // e[l] = d raw / d pre[l]; masks are piecewise constant in the weights.
  std::vector<Eigen::MatrixXd> e(layers);
  e[layers - 1] = Eigen::MatrixXd::Ones(1, n_pts);
  for (std::size_t l = layers - 1; l-- > 0;)
    e[l] = (params[l + 1].weight.transpose() * e[l + 1]).cwiseProduct((tape.pre[l].array() > 0.0).cast<double>().matrix());
  const Eigen::MatrixXd v = params[0].weight.transpose() * e[0];  // d raw / dx

  const Eigen::RowVectorXd d1 = raw.unaryExpr([fl](double r) { return final_derivative(fl, r); });
  const Eigen::RowVectorXd d2 = raw.unaryExpr([fl](double r) { return final_second_derivative(fl, r); });
  const Eigen::RowVectorXd v_sq = v.colwise().squaredNorm();
  const Eigen::RowVectorXd norm = (d1.array().square() * v_sq.array() + 1e-12).sqrt();
  const Eigen::RowVectorXd excess = (norm.array() / spec.lipschitz - 1.0).cwiseMax(0.0);
  const double value = spec.weight * excess.array().square().mean();
  if (!grads) return value;
  if (grads->size() != layers) *grads = zeros_like(params);

  // d value / d norm_j, folded with the 1/N of the mean.
  const Eigen::RowVectorXd kappa =
      sign * spec.weight * 2.0 * excess.array() / (spec.lipschitz * static_cast<double>(n_pts));
  if ((kappa.array() == 0.0).all()) return value;

  // norm depends on the weights through v (multilinear) and through
  // final'(raw): d norm = (d1^2 v . dv + |v|^2 d1 d2 draw) / norm.
  const Eigen::MatrixXd u = v.array().rowwise() * (kappa.array() * d1.array().square() / norm.array());
  const Eigen::RowVectorXd omega = kappa.array() * v_sq.array() * d1.array() * d2.array() / norm.array();

  Eigen::MatrixXd a = u;  // a[l-1]: direction propagated forward to layer l's input
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::MatrixXd e_omega = e[l].array().rowwise() * omega.array();
    (*grads)[l].weight.noalias() += e[l] * a.transpose();
    (*grads)[l].weight.noalias() += e_omega * tape.inputs[l].transpose();
    (*grads)[l].bias += e_omega.rowwise().sum();
    if (l + 1 < layers)
      a = (params[l].weight * a).cwiseProduct((tape.pre[l].array() > 0.0).cast<double>().matrix());
  }
  return value;
}

double penalty(const Mlp& f, const Eigen::MatrixXd& p_batch, const Eigen::MatrixXd& q_batch,
               const PenaltySpec& spec, Rng& rng, Parameters* grads, double sign) {
  spec.validate();
  if (spec.weight == 0.0) return 0.0;
  return gradient_penalty(f, penalty_points(p_batch, q_batch, spec.sampling, rng), spec, grads, sign);
}

}  // namespace icrenyi
