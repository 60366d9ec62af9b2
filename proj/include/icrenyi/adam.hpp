#pragma once

#include "icrenyi/mlp.hpp"

namespace icrenyi {

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates shaped like the parameters they update.
struct AdamState {
  AdamHyper hyper;
  Parameters first;
  Parameters second;
  long step = 0;

  AdamState(const Parameters& like, AdamHyper h);
};

/// One bias-corrected Adam step that decreases the loss whose gradient is
/// `grads`. For ascent pass the negated gradient.
void adam_step(AdamState& state, Parameters& params, const Parameters& grads);

}  // namespace icrenyi
