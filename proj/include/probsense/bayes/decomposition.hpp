#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace probsense::bayes {

// Squared-error split on a probe where the target function and its noise
// variance are known by construction: reducible is the model's mean squared
// deviation from the clean target, irreducible is the injected noise
// variance, and their sum should match the empirical MSE against noisy
// observations up to Monte-Carlo error.
struct ErrorDecomposition {
  double reducible = 0.0;
  double irreducible = 0.0;
  double empirical_mse = 0.0;
  double mse_std_error = 0.0;

  double expected_mse() const { return reducible + irreducible; }
};

using ScalarFn = std::function<double(const std::vector<double>&)>;

ErrorDecomposition bayes_error_decomposition(
    const std::vector<std::vector<double>>& inputs, const ScalarFn& f_true,
    const ScalarFn& predictor, double noise_variance, int draws_per_input,
    std::uint64_t seed);

}  // namespace probsense::bayes
