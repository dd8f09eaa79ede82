#include "probsense/bayes/predict.hpp"

#include <cmath>
#include <stdexcept>

namespace probsense::bayes {

double entropy_bits(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p <= 0.0) continue;
    h -= p * std::log2(p);
  }
  return std::max(h, 0.0);
}

int PredictiveDistribution::predicted_class() const {
  int best = 0;
  for (int i = 1; i < static_cast<int>(mean_probs.size()); ++i)
    if (mean_probs[i] > mean_probs[best]) best = i;
  return best;
}

PredictiveDistribution PredictiveDistribution::from_samples(
    std::vector<std::vector<double>> samples) {
  if (samples.empty())
    throw std::invalid_argument("PredictiveDistribution: no samples");
  const std::size_t n_c = samples.front().size();
  PredictiveDistribution d;
  d.mean_probs.assign(n_c, 0.0);
  double entropy_sum = 0.0;
  for (const std::vector<double>& p : samples) {
    if (p.size() != n_c)
      throw std::invalid_argument("PredictiveDistribution: ragged samples");
    for (std::size_t c = 0; c < n_c; ++c) d.mean_probs[c] += p[c];
    entropy_sum += entropy_bits(p);
  }
  for (double& p : d.mean_probs) p /= double(samples.size());
  d.predictive_entropy_bits = entropy_bits(d.mean_probs);
  d.aleatoric_bits = entropy_sum / double(samples.size());
  // Nonnegative by Jensen's inequality; rounding can leave the difference a
  // few ulp below zero.
  d.epistemic_bits =
      std::max(d.predictive_entropy_bits - d.aleatoric_bits, 0.0);
  d.samples = std::move(samples);
  return d;
}

PredictiveDistribution predict(const BnnModel& model, std::span<const double> x,
                               int t_samples, std::uint64_t seed) {
  if (t_samples < 1) throw std::invalid_argument("predict: T < 1");
  std::vector<std::vector<double>> samples;
  samples.reserve(std::size_t(t_samples));
  for (int t = 0; t < t_samples; ++t) {
    RandomStream rng(derive_seed(seed, "predict-sample", std::uint64_t(t)));
    samples.push_back(forward(model, x, NoiseDraw::draw(model, rng)));
  }
  return PredictiveDistribution::from_samples(std::move(samples));
}

}  // namespace probsense::bayes
