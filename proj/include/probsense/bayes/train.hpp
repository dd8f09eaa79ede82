#pragma once

#include <cstdint>
#include <vector>

#include "probsense/bayes/loss.hpp"
#include "probsense/bayes/optimizer.hpp"

namespace probsense::bayes {

struct TrainOptions {
  int epochs = 200;
  int batch_size = 4;
  int n_mc = 1;
  // Multiplies the batch_size / dataset_size KL weight; 1 keeps the summed
  // per-epoch KL equal to one full KL term.
  double kl_scale = 1.0;
  RmspropOptions rmsprop{};

  void validate() const;
};

struct TrainHistory {
  std::vector<double> loss;      // mean batch loss per epoch
  std::vector<double> accuracy;  // mean-forward accuracy per epoch
  bool diverged = false;
};

// Minibatch ELBO descent: per epoch, reshuffle from the master seed, draw a
// fresh noise bundle per batch, step RMSprop. Aborts (with the history so
// far) on a non-finite loss. Deterministic given the seed.
TrainHistory train(BnnModel& model, const std::vector<Example>& dataset,
                   const TrainOptions& options, std::uint64_t seed);

// Fraction of examples whose mean-forward argmax (ties toward class 0)
// equals the label.
double dataset_accuracy(const BnnModel& model,
                        const std::vector<Example>& dataset);

}  // namespace probsense::bayes
