#include "probsense/bayes/model.hpp"

#include <algorithm>
#include <cmath>

namespace probsense::bayes {

namespace {

void check_finite(std::span<const double> v, const char* where) {
  for (double x : v)
    if (!std::isfinite(x))
      throw NonFiniteError(std::string("non-finite value in ") + where);
}

// z = W^T x + b with realized parameters; fills realized w/b and z.
void dense_realize(const DenseLayer& layer, const LayerNoise& noise,
                   std::span<const double> input, std::vector<double>& w,
                   std::vector<double>& b, std::vector<double>& z) {
  w.resize(layer.w_mean.size());
  for (std::size_t k = 0; k < w.size(); ++k)
    w[k] = layer.w_mean[k] + softplus(layer.w_rho[k]) * noise.w[k];
  b.resize(layer.b_mean.size());
  for (std::size_t k = 0; k < b.size(); ++k)
    b[k] = layer.b_mean[k] + softplus(layer.b_rho[k]) * noise.b[k];
  z.assign(layer.out_dim, 0.0);
  for (int i = 0; i < layer.in_dim; ++i) {
    const double xi = input[i];
    if (xi == 0.0) continue;
    const double* row = w.data() + std::size_t(i) * layer.out_dim;
    for (int o = 0; o < layer.out_dim; ++o) z[o] += xi * row[o];
  }
  for (int o = 0; o < layer.out_dim; ++o) z[o] += b[o];
}

}  // namespace

const char* to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "none";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "none") return Activation::kNone;
  throw std::invalid_argument("unknown activation: " + s);
}

void DenseLayer::validate() const {
  if (in_dim < 1 || out_dim < 1)
    throw std::invalid_argument("DenseLayer: dims must be >= 1");
  const std::size_t nw = std::size_t(in_dim) * std::size_t(out_dim);
  if (w_mean.size() != nw || w_rho.size() != nw)
    throw std::invalid_argument("DenseLayer: weight array shape mismatch");
  if (b_mean.size() != std::size_t(out_dim) ||
      b_rho.size() != std::size_t(out_dim))
    throw std::invalid_argument("DenseLayer: bias array shape mismatch");
}

void BnnModel::validate() const {
  prior.validate();
  layer1.validate();
  layer2.validate();
  if (n_classes < 2) throw std::invalid_argument("BnnModel: n_classes < 2");
  if (layer2.in_dim != layer1.out_dim)
    throw std::invalid_argument("BnnModel: layer dimension mismatch");
  if (layer2.out_dim != 2 * n_classes)
    throw std::invalid_argument(
        "BnnModel: final layer must emit (mean, rho) per class");
}

std::size_t BnnModel::param_count() const {
  return layer1.w_mean.size() * 2 + layer1.b_mean.size() * 2 +
         layer2.w_mean.size() * 2 + layer2.b_mean.size() * 2;
}

BnnModel BnnModel::init(int in_dim, int hidden_dim, int n_classes,
                        std::uint64_t seed) {
  if (in_dim < 1 || hidden_dim < 1 || n_classes < 2)
    throw std::invalid_argument("BnnModel::init: bad dimensions");
  RandomStream rng(derive_seed(seed, "model-init"));
  const double rho0 = inv_softplus(0.05);
  auto make_layer = [&](int in, int out, Activation act) {
    DenseLayer layer;
    layer.in_dim = in;
    layer.out_dim = out;
    layer.activation = act;
    const std::size_t nw = std::size_t(in) * std::size_t(out);
    layer.w_mean.resize(nw);
    for (double& m : layer.w_mean) m = rng.normal(0.0, 0.1);
    layer.w_rho.assign(nw, rho0);
    layer.b_mean.resize(std::size_t(out));
    for (double& m : layer.b_mean) m = rng.normal(0.0, 0.1);
    layer.b_rho.assign(std::size_t(out), rho0);
    return layer;
  };
  BnnModel model;
  model.n_classes = n_classes;
  model.layer1 = make_layer(in_dim, hidden_dim, Activation::kRelu);
  model.layer2 = make_layer(hidden_dim, 2 * n_classes, Activation::kNone);
  model.validate();
  return model;
}

NoiseDraw NoiseDraw::draw(const BnnModel& model, RandomStream& rng) {
  NoiseDraw n;
  auto fill = [&](std::vector<double>& v, std::size_t count) {
    v.resize(count);
    for (double& x : v) x = rng.normal();
  };
  fill(n.l1.w, model.layer1.w_mean.size());
  fill(n.l1.b, model.layer1.b_mean.size());
  fill(n.l2.w, model.layer2.w_mean.size());
  fill(n.l2.b, model.layer2.b_mean.size());
  fill(n.head, std::size_t(model.n_classes));
  return n;
}

NoiseDraw NoiseDraw::zeros(const BnnModel& model) {
  NoiseDraw n;
  n.l1.w.assign(model.layer1.w_mean.size(), 0.0);
  n.l1.b.assign(model.layer1.b_mean.size(), 0.0);
  n.l2.w.assign(model.layer2.w_mean.size(), 0.0);
  n.l2.b.assign(model.layer2.b_mean.size(), 0.0);
  n.head.assign(std::size_t(model.n_classes), 0.0);
  return n;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

std::vector<double> forward(const BnnModel& model, std::span<const double> x,
                            const NoiseDraw& noise, ForwardCache* cache) {
  model.validate();
  if (static_cast<int>(x.size()) != model.in_dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  check_finite(x, "input");

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.x.assign(x.begin(), x.end());

  dense_realize(model.layer1, noise.l1, x, c.w1, c.b1, c.z1);
  check_finite(c.z1, "layer1");
  c.a1 = c.z1;
  for (double& v : c.a1) v = std::max(v, 0.0);

  dense_realize(model.layer2, noise.l2, c.a1, c.w2, c.b2, c.z2);
  check_finite(c.z2, "layer2");

  const int n_c = model.n_classes;
  c.logits.resize(n_c);
  for (int k = 0; k < n_c; ++k)
    c.logits[k] = c.z2[k] + softplus(c.z2[n_c + k]) * noise.head[k];
  check_finite(c.logits, "head");

  c.probs = softmax(c.logits);
  return c.probs;
}

std::vector<double> mean_forward(const BnnModel& model,
                                 std::span<const double> x) {
  return forward(model, x, NoiseDraw::zeros(model));
}

std::vector<ParamView> param_views(BnnModel& model) {
  return {
      {"layer1.w_mean", &model.layer1.w_mean},
      {"layer1.w_rho", &model.layer1.w_rho},
      {"layer1.b_mean", &model.layer1.b_mean},
      {"layer1.b_rho", &model.layer1.b_rho},
      {"layer2.w_mean", &model.layer2.w_mean},
      {"layer2.w_rho", &model.layer2.w_rho},
      {"layer2.b_mean", &model.layer2.b_mean},
      {"layer2.b_rho", &model.layer2.b_rho},
  };
}

}  // namespace probsense::bayes
