#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "probsense/bayes/model.hpp"

namespace probsense::bayes {

// -sum p * log2(p), with 0 * log2(0) = 0.
double entropy_bits(std::span<const double> probs);

struct PredictiveDistribution {
  std::vector<std::vector<double>> samples;  // T probability vectors
  std::vector<double> mean_probs;
  double predictive_entropy_bits = 0.0;  // entropy of mean_probs
  double aleatoric_bits = 0.0;           // mean per-sample entropy
  double epistemic_bits = 0.0;           // predictive - aleatoric

  int predicted_class() const;  // argmax of mean_probs, ties toward class 0

  static PredictiveDistribution from_samples(
      std::vector<std::vector<double>> samples);
};

// T forward passes with fresh weight and head noise; each sample uses its own
// seed-derived stream so evaluation order cannot change the result.
PredictiveDistribution predict(const BnnModel& model, std::span<const double> x,
                               int t_samples, std::uint64_t seed);

}  // namespace probsense::bayes
