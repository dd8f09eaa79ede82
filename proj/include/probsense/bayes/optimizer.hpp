#pragma once

#include "probsense/bayes/loss.hpp"
#include "probsense/bayes/model.hpp"

namespace probsense::bayes {

struct RmspropOptions {
  double learning_rate = 0.01;
  double decay = 0.9;
  double epsilon = 1e-7;

  void validate() const;
};

// Per-parameter squared-gradient cache plus the step schedule.
struct TrainState {
  RmspropOptions options;
  Gradients cache;
  int epoch = 0;

  static TrainState init(const BnnModel& model, const RmspropOptions& options);
};

// cache <- decay * cache + (1 - decay) * g^2
// param <- param - lr * g / (sqrt(cache) + epsilon)
void rmsprop_step(BnnModel& model, const Gradients& grads, TrainState& state);

}  // namespace probsense::bayes
