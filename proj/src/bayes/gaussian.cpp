#include "probsense/bayes/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "probsense/rng.hpp"

namespace probsense::bayes {

void Gaussian::validate() const {
  if (!(std > 0.0) || !std::isfinite(std) || !std::isfinite(mean))
    throw std::invalid_argument("Gaussian: std must be finite and > 0");
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double inv_softplus(double y) {
  if (!(y > 0.0)) throw std::invalid_argument("inv_softplus: y <= 0");
  // ln(e^y - 1) = y + ln(1 - e^-y)
  return y + std::log(-std::expm1(-y));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double gaussian_log_pdf(double x, const Gaussian& g) {
  g.validate();
  const double z = (x - g.mean) / g.std;
  return -0.5 * z * z - std::log(g.std) -
         0.5 * std::log(2.0 * std::numbers::pi);
}

double kl_gaussian(const Gaussian& q, const Gaussian& p) {
  q.validate();
  p.validate();
  const double var_ratio = (q.std * q.std) / (p.std * p.std);
  const double mean_term = (q.mean - p.mean) / p.std;
  return std::log(p.std / q.std) + 0.5 * (var_ratio + mean_term * mean_term) -
         0.5;
}

MonteCarloEstimate kl_monte_carlo_stats(const Gaussian& q, const Gaussian& p,
                                        int n, std::uint64_t seed) {
  q.validate();
  p.validate();
  if (n < 1) throw std::invalid_argument("kl_monte_carlo: n < 1");
  RandomStream rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = rng.normal(q.mean, q.std);
    const double v = gaussian_log_pdf(t, q) - gaussian_log_pdf(t, p);
    sum += v;
    sum_sq += v * v;
  }
  MonteCarloEstimate est;
  est.mean = sum / double(n);
  if (n > 1) {
    const double var = (sum_sq - sum * sum / double(n)) / double(n - 1);
    est.std_error = std::sqrt(std::max(var, 0.0) / double(n));
  }
  return est;
}

double kl_monte_carlo(const Gaussian& q, const Gaussian& p, int n,
                      std::uint64_t seed) {
  return kl_monte_carlo_stats(q, p, n, seed).mean;
}

}  // namespace probsense::bayes
