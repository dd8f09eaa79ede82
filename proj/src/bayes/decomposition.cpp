#include "probsense/bayes/decomposition.hpp"

#include <cmath>
#include <stdexcept>

#include "probsense/rng.hpp"

namespace probsense::bayes {

ErrorDecomposition bayes_error_decomposition(
    const std::vector<std::vector<double>>& inputs, const ScalarFn& f_true,
    const ScalarFn& predictor, double noise_variance, int draws_per_input,
    std::uint64_t seed) {
  if (inputs.empty())
    throw std::invalid_argument("decomposition: no probe inputs");
  if (draws_per_input < 1)
    throw std::invalid_argument("decomposition: draws_per_input < 1");
  if (noise_variance < 0.0)
    throw std::invalid_argument("decomposition: negative noise variance");

  ErrorDecomposition d;
  d.irreducible = noise_variance;
  const double noise_std = std::sqrt(noise_variance);
  RandomStream rng(derive_seed(seed, "bayes-decomposition"));

  double sq_sum = 0.0;
  double err_sum = 0.0;
  double err_sq_sum = 0.0;
  const long long total =
      static_cast<long long>(inputs.size()) * draws_per_input;
  for (const std::vector<double>& x : inputs) {
    const double truth = f_true(x);
    const double pred = predictor(x);
    const double bias = truth - pred;
    sq_sum += bias * bias;
    for (int k = 0; k < draws_per_input; ++k) {
      const double y = truth + rng.normal(0.0, noise_std);
      const double e = (y - pred) * (y - pred);
      err_sum += e;
      err_sq_sum += e * e;
    }
  }
  d.reducible = sq_sum / double(inputs.size());
  d.empirical_mse = err_sum / double(total);
  if (total > 1) {
    const double var =
        (err_sq_sum - err_sum * err_sum / double(total)) / double(total - 1);
    d.mse_std_error = std::sqrt(std::max(var, 0.0) / double(total));
  }
  return d;
}

}  // namespace probsense::bayes
