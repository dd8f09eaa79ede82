#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "probsense/bayes/model.hpp"

namespace probsense::bayes {

struct Example {
  std::vector<double> x;
  int label = 0;  // class index
};

// -ln(probs[label]) in nats; probabilities floored at 1e-12 before the log.
double nll_categorical(std::span<const double> probs, int label);

// Sum of per-parameter KL(posterior || prior) over every weight and bias.
double total_kl(const BnnModel& model);

// One noise draw per (mc sample, batch element); index mc * batch_size + b.
struct NoiseBundle {
  std::vector<NoiseDraw> draws;
  int n_mc = 0;
  int batch_size = 0;
};
NoiseBundle draw_noise_bundle(const BnnModel& model, int n_mc, int batch_size,
                              RandomStream& rng);

// kl_weight * total_kl + (1/n_mc) * sum over draws of the per-example NLL,
// with the supplied noise held fixed. This is the exact function grad_elbo
// differentiates.
double elbo_loss_with_noise(const BnnModel& model,
                            const std::vector<Example>& batch,
                            const NoiseBundle& noise, double kl_weight);

// Convenience wrapper drawing fresh noise from the seed.
double elbo_loss(const BnnModel& model, const std::vector<Example>& batch,
                 int n_mc, double kl_weight, std::uint64_t seed);

struct LayerGrads {
  std::vector<double> w_mean;
  std::vector<double> w_rho;
  std::vector<double> b_mean;
  std::vector<double> b_rho;
};

struct Gradients {
  LayerGrads l1;
  LayerGrads l2;

  static Gradients zeros_like(const BnnModel& model);
};

// Same order as param_views.
std::vector<std::vector<double>*> grad_views(Gradients& grads);
std::vector<const std::vector<double>*> grad_views(const Gradients& grads);

// Exact gradient of elbo_loss_with_noise with respect to every (mean, rho):
// analytic KL derivative plus the NLL path backpropagated through the
// reparameterized draws.
Gradients grad_elbo(const BnnModel& model, const std::vector<Example>& batch,
                    const NoiseBundle& noise, double kl_weight);

}  // namespace probsense::bayes
