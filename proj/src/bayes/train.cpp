#include "probsense/bayes/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace probsense::bayes {

namespace {

int argmax_tie_low(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

void TrainOptions::validate() const {
  if (epochs < 0) throw std::invalid_argument("TrainOptions: epochs < 0");
  if (batch_size < 1 || n_mc < 1)
    throw std::invalid_argument("TrainOptions: counts must be >= 1");
  if (!(kl_scale >= 0.0))
    throw std::invalid_argument("TrainOptions: kl_scale < 0");
  rmsprop.validate();
}

double dataset_accuracy(const BnnModel& model,
                        const std::vector<Example>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("accuracy: empty dataset");
  int hits = 0;
  for (const Example& ex : dataset) {
    const std::vector<double> probs = mean_forward(model, ex.x);
    if (argmax_tie_low(probs) == ex.label) ++hits;
  }
  return double(hits) / double(dataset.size());
}

TrainHistory train(BnnModel& model, const std::vector<Example>& dataset,
                   const TrainOptions& options, std::uint64_t seed) {
  options.validate();
  model.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  for (const Example& ex : dataset)
    if (static_cast<int>(ex.x.size()) != model.in_dim())
      throw std::invalid_argument("train: example dimension mismatch");

  const int n = static_cast<int>(dataset.size());
  TrainState state = TrainState::init(model, options.rmsprop);
  TrainHistory history;
  history.loss.reserve(options.epochs);
  history.accuracy.reserve(options.epochs);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    RandomStream shuffle_rng(derive_seed(seed, "train-shuffle", epoch));
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.uniform_int(0, i)]);
    RandomStream noise_rng(derive_seed(seed, "train-noise", epoch));

    double loss_sum = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += options.batch_size) {
      const int bsize = std::min(options.batch_size, n - start);
      std::vector<Example> batch;
      batch.reserve(bsize);
      for (int b = 0; b < bsize; ++b) batch.push_back(dataset[order[start + b]]);

      const double kl_weight = options.kl_scale * double(bsize) / double(n);
      const NoiseBundle bundle =
          draw_noise_bundle(model, options.n_mc, bsize, noise_rng);
      // A non-finite loss and a non-finite intermediate are the same event
      // from the caller's perspective: the trajectory left the finite domain.
      try {
        const double loss =
            elbo_loss_with_noise(model, batch, bundle, kl_weight);
        if (!std::isfinite(loss)) {
          history.diverged = true;
          return history;
        }
        const Gradients grads = grad_elbo(model, batch, bundle, kl_weight);
        rmsprop_step(model, grads, state);
        loss_sum += loss;
      } catch (const NonFiniteError&) {
        history.diverged = true;
        return history;
      }
      ++batches;
    }
    ++state.epoch;
    history.loss.push_back(loss_sum / double(batches));
    history.accuracy.push_back(dataset_accuracy(model, dataset));
  }
  return history;
}

}  // namespace probsense::bayes
