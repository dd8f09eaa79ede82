#include "probsense/bayes/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace probsense::bayes {

namespace {

constexpr double kProbFloor = 1e-12;

void validate_simplex(std::span<const double> probs) {
  if (probs.empty()) throw std::invalid_argument("nll: empty probabilities");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < -1e-9 || p > 1.0 + 1e-9)
      throw std::invalid_argument("nll: probabilities outside [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("nll: probabilities do not sum to 1");
}

void validate_bundle(const BnnModel& model, const std::vector<Example>& batch,
                     const NoiseBundle& noise) {
  if (batch.empty()) throw std::invalid_argument("elbo: empty batch");
  if (noise.n_mc < 1) throw std::invalid_argument("elbo: n_mc < 1");
  if (noise.batch_size != static_cast<int>(batch.size()))
    throw std::invalid_argument("elbo: noise batch size mismatch");
  if (noise.draws.size() != std::size_t(noise.n_mc) * batch.size())
    throw std::invalid_argument("elbo: noise draw count mismatch");
  for (const Example& ex : batch) {
    if (static_cast<int>(ex.x.size()) != model.in_dim())
      throw std::invalid_argument("elbo: example dimension mismatch");
    if (ex.label < 0 || ex.label >= model.n_classes)
      throw std::invalid_argument("elbo: label out of range");
  }
}

double layer_kl(const DenseLayer& layer, const Gaussian& prior) {
  double total = 0.0;
  for (std::size_t k = 0; k < layer.w_mean.size(); ++k)
    total += kl_gaussian({layer.w_mean[k], softplus(layer.w_rho[k])}, prior);
  for (std::size_t k = 0; k < layer.b_mean.size(); ++k)
    total += kl_gaussian({layer.b_mean[k], softplus(layer.b_rho[k])}, prior);
  return total;
}

// Accumulates scale * dLoss/d(params) for one dense layer and returns the
// gradient with respect to its input. The rho path follows
// theta = mean + softplus(rho) * eps, so d theta / d rho = eps * logistic(rho).
void dense_backward(const DenseLayer& layer, const LayerNoise& noise,
                    std::span<const double> input,
                    std::span<const double> realized_w,
                    std::span<const double> dz, double scale, LayerGrads& g,
                    std::vector<double>* d_input) {
  for (int i = 0; i < layer.in_dim; ++i) {
    const double xi = input[i];
    for (int o = 0; o < layer.out_dim; ++o) {
      const std::size_t k = std::size_t(i) * layer.out_dim + o;
      const double dw = xi * dz[o];
      g.w_mean[k] += scale * dw;
      g.w_rho[k] += scale * dw * noise.w[k] * logistic(layer.w_rho[k]);
    }
  }
  for (int o = 0; o < layer.out_dim; ++o) {
    g.b_mean[o] += scale * dz[o];
    g.b_rho[o] += scale * dz[o] * noise.b[o] * logistic(layer.b_rho[o]);
  }
  if (d_input) {
    d_input->assign(layer.in_dim, 0.0);
    for (int i = 0; i < layer.in_dim; ++i) {
      double acc = 0.0;
      const double* row = realized_w.data() + std::size_t(i) * layer.out_dim;
      for (int o = 0; o < layer.out_dim; ++o) acc += row[o] * dz[o];
      (*d_input)[i] = acc;
    }
  }
}

void add_kl_grads(const DenseLayer& layer, const Gaussian& prior,
                  double kl_weight, LayerGrads& g) {
  const double prior_var = prior.std * prior.std;
  auto accumulate = [&](const std::vector<double>& mean,
                        const std::vector<double>& rho,
                        std::vector<double>& g_mean,
                        std::vector<double>& g_rho) {
    for (std::size_t k = 0; k < mean.size(); ++k) {
      g_mean[k] += kl_weight * (mean[k] - prior.mean) / prior_var;
      const double s = softplus(rho[k]);
      g_rho[k] += kl_weight * (s / prior_var - 1.0 / s) * logistic(rho[k]);
    }
  };
  accumulate(layer.w_mean, layer.w_rho, g.w_mean, g.w_rho);
  accumulate(layer.b_mean, layer.b_rho, g.b_mean, g.b_rho);
}

}  // namespace

double nll_categorical(std::span<const double> probs, int label) {
  validate_simplex(probs);
  if (label < 0 || label >= static_cast<int>(probs.size()))
    throw std::invalid_argument("nll: label out of range");
  return -std::log(std::max(probs[label], kProbFloor));
}

double total_kl(const BnnModel& model) {
  model.validate();
  return layer_kl(model.layer1, model.prior) +
         layer_kl(model.layer2, model.prior);
}

NoiseBundle draw_noise_bundle(const BnnModel& model, int n_mc, int batch_size,
                              RandomStream& rng) {
  if (n_mc < 1 || batch_size < 1)
    throw std::invalid_argument("draw_noise_bundle: counts must be >= 1");
  NoiseBundle bundle;
  bundle.n_mc = n_mc;
  bundle.batch_size = batch_size;
  bundle.draws.reserve(std::size_t(n_mc) * batch_size);
  for (int i = 0; i < n_mc * batch_size; ++i)
    bundle.draws.push_back(NoiseDraw::draw(model, rng));
  return bundle;
}

double elbo_loss_with_noise(const BnnModel& model,
                            const std::vector<Example>& batch,
                            const NoiseBundle& noise, double kl_weight) {
  model.validate();
  validate_bundle(model, batch, noise);
  double nll_sum = 0.0;
  for (int mc = 0; mc < noise.n_mc; ++mc) {
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const NoiseDraw& draw = noise.draws[std::size_t(mc) * batch.size() + b];
      const std::vector<double> probs = forward(model, batch[b].x, draw);
      nll_sum += nll_categorical(probs, batch[b].label);
    }
  }
  return kl_weight * total_kl(model) + nll_sum / double(noise.n_mc);
}

double elbo_loss(const BnnModel& model, const std::vector<Example>& batch,
                 int n_mc, double kl_weight, std::uint64_t seed) {
  RandomStream rng(seed);
  const NoiseBundle bundle =
      draw_noise_bundle(model, n_mc, static_cast<int>(batch.size()), rng);
  return elbo_loss_with_noise(model, batch, bundle, kl_weight);
}

Gradients Gradients::zeros_like(const BnnModel& model) {
  auto layer_zeros = [](const DenseLayer& layer) {
    LayerGrads g;
    g.w_mean.assign(layer.w_mean.size(), 0.0);
    g.w_rho.assign(layer.w_rho.size(), 0.0);
    g.b_mean.assign(layer.b_mean.size(), 0.0);
    g.b_rho.assign(layer.b_rho.size(), 0.0);
    return g;
  };
  Gradients g;
  g.l1 = layer_zeros(model.layer1);
  g.l2 = layer_zeros(model.layer2);
  return g;
}

std::vector<std::vector<double>*> grad_views(Gradients& grads) {
  return {&grads.l1.w_mean, &grads.l1.w_rho, &grads.l1.b_mean,
          &grads.l1.b_rho,  &grads.l2.w_mean, &grads.l2.w_rho,
          &grads.l2.b_mean, &grads.l2.b_rho};
}

std::vector<const std::vector<double>*> grad_views(const Gradients& grads) {
  return {&grads.l1.w_mean, &grads.l1.w_rho, &grads.l1.b_mean,
          &grads.l1.b_rho,  &grads.l2.w_mean, &grads.l2.w_rho,
          &grads.l2.b_mean, &grads.l2.b_rho};
}

Gradients grad_elbo(const BnnModel& model, const std::vector<Example>& batch,
                    const NoiseBundle& noise, double kl_weight) {
  model.validate();
  validate_bundle(model, batch, noise);
  Gradients grads = Gradients::zeros_like(model);
  const double scale = 1.0 / double(noise.n_mc);
  const int n_c = model.n_classes;

  ForwardCache cache;
  for (int mc = 0; mc < noise.n_mc; ++mc) {
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const NoiseDraw& draw = noise.draws[std::size_t(mc) * batch.size() + b];
      forward(model, batch[b].x, draw, &cache);

      // Softmax + NLL collapses to probs minus the one-hot label.
      std::vector<double> dl = cache.probs;
      dl[batch[b].label] -= 1.0;

      // Head: logit_c = z2[c] + softplus(z2[n_c + c]) * eps_c.
      std::vector<double> dz2(std::size_t(2) * n_c, 0.0);
      for (int c = 0; c < n_c; ++c) {
        dz2[c] = dl[c];
        dz2[n_c + c] = dl[c] * draw.head[c] * logistic(cache.z2[n_c + c]);
      }

      std::vector<double> da1;
      dense_backward(model.layer2, draw.l2, cache.a1, cache.w2, dz2, scale,
                     grads.l2, &da1);

      std::vector<double> dz1(da1.size());
      for (std::size_t o = 0; o < da1.size(); ++o)
        dz1[o] = cache.z1[o] > 0.0 ? da1[o] : 0.0;
      dense_backward(model.layer1, draw.l1, cache.x, cache.w1, dz1, scale,
                     grads.l1, nullptr);
    }
  }

  add_kl_grads(model.layer1, model.prior, kl_weight, grads.l1);
  add_kl_grads(model.layer2, model.prior, kl_weight, grads.l2);
  return grads;
}

}  // namespace probsense::bayes
