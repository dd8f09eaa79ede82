#pragma once

#include <cstdint>

namespace probsense::bayes {

struct Gaussian {
  double mean = 0.0;
  double std = 1.0;

  void validate() const;
};

// ln(1 + e^x), overflow-safe on both tails.
double softplus(double x);

// Inverse of softplus on y > 0.
double inv_softplus(double y);

// 1 / (1 + e^-x); the derivative of softplus.
double logistic(double x);

double gaussian_log_pdf(double x, const Gaussian& g);

// KL(q || p) in nats: ln(sp/sq) + (sq^2 + (mq - mp)^2) / (2 sp^2) - 1/2.
double kl_gaussian(const Gaussian& q, const Gaussian& p);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Sample estimate of KL(q || p): average of ln q(t) - ln p(t) over n draws
// t ~ q. Unbiased for the analytic value.
MonteCarloEstimate kl_monte_carlo_stats(const Gaussian& q, const Gaussian& p,
                                        int n, std::uint64_t seed);
double kl_monte_carlo(const Gaussian& q, const Gaussian& p, int n,
                      std::uint64_t seed);

}  // namespace probsense::bayes
