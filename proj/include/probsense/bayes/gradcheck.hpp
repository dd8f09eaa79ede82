#pragma once

#include <string>
#include <vector>

#include "probsense/bayes/loss.hpp"

namespace probsense::bayes {

struct GradCheckResult {
  bool pass = false;
  int n_params = 0;
  int n_failures = 0;
  double max_rel_error = 0.0;
  std::string worst_param;  // "layer1.w_mean[3]" style
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Sweeps every parameter: central finite difference of elbo_loss_with_noise
// (step h) against grad_elbo. A parameter passes when
// |analytic - numeric| <= max(rel_tol * max(|analytic|, |numeric|), abs_tol).
GradCheckResult gradient_check(const BnnModel& model,
                               const std::vector<Example>& batch,
                               const NoiseBundle& noise, double kl_weight,
                               double h = 1e-5, double rel_tol = 1e-4,
                               double abs_tol = 1e-8);

}  // namespace probsense::bayes
