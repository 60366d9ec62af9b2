#include "icrenyi/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace icrenyi {

AdamState::AdamState(const Parameters& like, AdamHyper h)
    : hyper(h), first(zeros_like(like)), second(zeros_like(like)) {}

void adam_step(AdamState& state, Parameters& params, const Parameters& grads) {
  if (params.size() != grads.size() || params.size() != state.first.size())
    throw std::invalid_argument("adam_step: parameter/gradient layer counts differ");
  ++state.step;
  const AdamHyper& h = state.hyper;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
  const double lr = h.learning_rate;

  auto update = [&](auto& theta, const auto& g, auto& m, auto& v) {
    if (theta.size() != g.size()) throw std::invalid_argument("adam_step: shape mismatch");
    m = h.beta1 * m + (1.0 - h.beta1) * g;
    v = h.beta2 * v + (1.0 - h.beta2) * g.cwiseAbs2();
    theta.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + h.epsilon);
  };
  for (std::size_t l = 0; l < params.size(); ++l) {
    update(params[l].weight, grads[l].weight, state.first[l].weight, state.second[l].weight);
    update(params[l].bias, grads[l].bias, state.first[l].bias, state.second[l].bias);
  }
}

}  // namespace icrenyi
