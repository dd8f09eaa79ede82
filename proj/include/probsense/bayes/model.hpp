#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "probsense/bayes/gaussian.hpp"
#include "probsense/rng.hpp"

namespace probsense::bayes {

struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Activation { kRelu, kNone };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Dense layer with a factorized Gaussian posterior per weight and bias.
// Realized parameters are theta = mean + softplus(rho) * eps.
struct DenseLayer {
  int in_dim = 0;
  int out_dim = 0;
  Activation activation = Activation::kNone;
  std::vector<double> w_mean;  // in_dim * out_dim, index [i * out_dim + o]
  std::vector<double> w_rho;
  std::vector<double> b_mean;  // out_dim
  std::vector<double> b_rho;

  void validate() const;
};

// Two variational layers plus a sampling head: the final layer emits
// (mean_0..mean_{C-1}, rho_0..rho_{C-1}); the head draws per-class logits
// l_c = mean_c + softplus(rho_c) * eps_c and applies softmax.
struct BnnModel {
  Gaussian prior{0.0, 1.0};
  DenseLayer layer1;
  DenseLayer layer2;
  int n_classes = 2;

  int in_dim() const { return layer1.in_dim; }
  void validate() const;
  std::size_t param_count() const;

  // Posterior means ~ N(0, 0.1^2); rho set so softplus(rho) = 0.05.
  static BnnModel init(int in_dim, int hidden_dim, int n_classes,
                       std::uint64_t seed);
  static BnnModel init(std::uint64_t seed) { return init(7, 4, 2, seed); }
};

struct LayerNoise {
  std::vector<double> w;
  std::vector<double> b;
};

// One epsilon per posterior parameter plus one per head logit. Fixing a draw
// makes forward (and the loss) a deterministic, differentiable function of
// the variational parameters.
struct NoiseDraw {
  LayerNoise l1;
  LayerNoise l2;
  std::vector<double> head;

  static NoiseDraw draw(const BnnModel& model, RandomStream& rng);
  static NoiseDraw zeros(const BnnModel& model);
};

// Intermediate values retained for backpropagation.
struct ForwardCache {
  std::vector<double> x;
  std::vector<double> w1, b1;  // realized layer-1 parameters
  std::vector<double> z1, a1;
  std::vector<double> w2, b2;
  std::vector<double> z2;      // (means, rhos) feeding the head
  std::vector<double> logits;
  std::vector<double> probs;
};

std::vector<double> softmax(std::span<const double> logits);

std::vector<double> forward(const BnnModel& model, std::span<const double> x,
                            const NoiseDraw& noise,
                            ForwardCache* cache = nullptr);

// Forward at the posterior means with zero head noise: the deterministic
// network used for accuracy tracking and the shrinking-scale limit.
std::vector<double> mean_forward(const BnnModel& model,
                                 std::span<const double> x);

// Stable enumeration of every parameter array; gradients, the optimizer
// cache, and finite-difference sweeps all share this order.
struct ParamView {
  std::string name;
  std::vector<double>* values = nullptr;
};
std::vector<ParamView> param_views(BnnModel& model);

}  // namespace probsense::bayes
