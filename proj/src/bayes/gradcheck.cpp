#include "probsense/bayes/gradcheck.hpp"

#include <cmath>

namespace probsense::bayes {

GradCheckResult gradient_check(const BnnModel& model,
                               const std::vector<Example>& batch,
                               const NoiseBundle& noise, double kl_weight,
                               double h, double rel_tol, double abs_tol) {
  const Gradients analytic = grad_elbo(model, batch, noise, kl_weight);

  BnnModel probe = model;
  std::vector<ParamView> params = param_views(probe);
  const std::vector<const std::vector<double>*> grads = grad_views(analytic);

  // diff <= max(rel_tol * scale, abs_tol) is equivalent to
  // diff / max(scale, abs_tol / rel_tol) <= rel_tol, so the reported maximum
  // is exactly the quantity the pass threshold applies to.
  const double scale_floor = abs_tol / rel_tol;
  GradCheckResult result;
  result.pass = true;
  for (std::size_t v = 0; v < params.size(); ++v) {
    std::vector<double>& values = *params[v].values;
    const std::vector<double>& g = *grads[v];
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double saved = values[k];
      values[k] = saved + h;
      const double up = elbo_loss_with_noise(probe, batch, noise, kl_weight);
      values[k] = saved - h;
      const double down = elbo_loss_with_noise(probe, batch, noise, kl_weight);
      values[k] = saved;
      const double numeric = (up - down) / (2.0 * h);

      const double diff = std::abs(g[k] - numeric);
      const double scale = std::max(std::abs(g[k]), std::abs(numeric));
      const double rel = diff / std::max(scale, scale_floor);
      ++result.n_params;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = params[v].name + "[" + std::to_string(k) + "]";
        result.worst_analytic = g[k];
        result.worst_numeric = numeric;
      }
      if (rel > rel_tol) {
        result.pass = false;
        ++result.n_failures;
      }
    }
  }
  return result;
}

}  // namespace probsense::bayes
