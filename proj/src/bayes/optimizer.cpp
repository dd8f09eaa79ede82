#include "probsense/bayes/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace probsense::bayes {

void RmspropOptions::validate() const {
  if (!(learning_rate > 0.0) || !(epsilon > 0.0) || !(decay > 0.0) ||
      decay >= 1.0)
    throw std::invalid_argument("RmspropOptions: need lr > 0, eps > 0, "
                                "0 < decay < 1");
}

TrainState TrainState::init(const BnnModel& model,
                            const RmspropOptions& options) {
  options.validate();
  TrainState s;
  s.options = options;
  s.cache = Gradients::zeros_like(model);
  return s;
}

void rmsprop_step(BnnModel& model, const Gradients& grads, TrainState& state) {
  const std::vector<ParamView> params = param_views(model);
  const std::vector<const std::vector<double>*> gs = grad_views(grads);
  const std::vector<std::vector<double>*> caches = grad_views(state.cache);
  const RmspropOptions& o = state.options;
  for (std::size_t v = 0; v < params.size(); ++v) {
    std::vector<double>& p = *params[v].values;
    const std::vector<double>& g = *gs[v];
    std::vector<double>& c = *caches[v];
    if (g.size() != p.size() || c.size() != p.size())
      throw std::invalid_argument("rmsprop_step: shape mismatch in " +
                                  params[v].name);
    for (std::size_t k = 0; k < p.size(); ++k) {
      c[k] = o.decay * c[k] + (1.0 - o.decay) * g[k] * g[k];
      p[k] -= o.learning_rate * g[k] / (std::sqrt(c[k]) + o.epsilon);
    }
  }
}

}  // namespace probsense::bayes
