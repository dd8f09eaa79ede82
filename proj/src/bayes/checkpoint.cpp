#include "probsense/bayes/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace probsense::bayes {

namespace {

using nlohmann::json;

json layer_to_json(const DenseLayer& layer) {
  return json{{"in_dim", layer.in_dim},
              {"out_dim", layer.out_dim},
              {"activation", to_string(layer.activation)},
              {"w_mean", layer.w_mean},
              {"w_rho", layer.w_rho},
              {"b_mean", layer.b_mean},
              {"b_rho", layer.b_rho}};
}

DenseLayer layer_from_json(const json& j) {
  DenseLayer layer;
  layer.in_dim = j.at("in_dim").get<int>();
  layer.out_dim = j.at("out_dim").get<int>();
  layer.activation = activation_from_string(j.at("activation").get<std::string>());
  layer.w_mean = j.at("w_mean").get<std::vector<double>>();
  layer.w_rho = j.at("w_rho").get<std::vector<double>>();
  layer.b_mean = j.at("b_mean").get<std::vector<double>>();
  layer.b_rho = j.at("b_rho").get<std::vector<double>>();
  layer.validate();
  return layer;
}

}  // namespace

Standardization Standardization::fit(
    const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("Standardization: no rows");
  const std::size_t dim = rows.front().size();
  Standardization s;
  s.mean.assign(dim, 0.0);
  s.std.assign(dim, 0.0);
  for (const std::vector<double>& row : rows) {
    if (row.size() != dim)
      throw std::invalid_argument("Standardization: ragged rows");
    for (std::size_t c = 0; c < dim; ++c) s.mean[c] += row[c];
  }
  for (double& m : s.mean) m /= double(rows.size());
  for (const std::vector<double>& row : rows)
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = row[c] - s.mean[c];
      s.std[c] += d * d;
    }
  for (double& v : s.std) {
    v = std::sqrt(v / double(rows.size()));
    if (v == 0.0) v = 1.0;  // constant column stays centered at zero
  }
  return s;
}

std::vector<double> Standardization::apply(const std::vector<double>& x) const {
  if (x.size() != mean.size())
    throw std::invalid_argument("Standardization: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t c = 0; c < x.size(); ++c)
    out[c] = (x[c] - mean[c]) / std[c];
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  c.model.validate();
  json j;
  j["architecture"] = {{"in_dim", c.model.in_dim()},
                       {"hidden_dim", c.model.layer1.out_dim},
                       {"n_classes", c.model.n_classes}};
  j["prior"] = {{"mean", c.model.prior.mean}, {"std", c.model.prior.std}};
  j["layers"] = json::array(
      {layer_to_json(c.model.layer1), layer_to_json(c.model.layer2)});
  j["train_options"] = {{"epochs", c.train_options.epochs},
                        {"batch_size", c.train_options.batch_size},
                        {"n_mc", c.train_options.n_mc},
                        {"kl_scale", c.train_options.kl_scale},
                        {"learning_rate", c.train_options.rmsprop.learning_rate},
                        {"decay", c.train_options.rmsprop.decay},
                        {"epsilon", c.train_options.rmsprop.epsilon}};
  j["standardization"] = {{"mean", c.standardization.mean},
                          {"std", c.standardization.std}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  in >> j;

  Checkpoint c;
  c.model.prior.mean = j.at("prior").at("mean").get<double>();
  c.model.prior.std = j.at("prior").at("std").get<double>();
  const json& layers = j.at("layers");
  if (layers.size() != 2)
    throw std::runtime_error("checkpoint: expected exactly two layers");
  c.model.layer1 = layer_from_json(layers[0]);
  c.model.layer2 = layer_from_json(layers[1]);
  c.model.n_classes = j.at("architecture").at("n_classes").get<int>();
  c.model.validate();

  const json& t = j.at("train_options");
  c.train_options.epochs = t.at("epochs").get<int>();
  c.train_options.batch_size = t.at("batch_size").get<int>();
  c.train_options.n_mc = t.at("n_mc").get<int>();
  c.train_options.kl_scale = t.at("kl_scale").get<double>();
  c.train_options.rmsprop.learning_rate = t.at("learning_rate").get<double>();
  c.train_options.rmsprop.decay = t.at("decay").get<double>();
  c.train_options.rmsprop.epsilon = t.at("epsilon").get<double>();
  c.train_options.validate();

  c.standardization.mean =
      j.at("standardization").at("mean").get<std::vector<double>>();
  c.standardization.std =
      j.at("standardization").at("std").get<std::vector<double>>();
  if (c.standardization.mean.size() != c.standardization.std.size())
    throw std::runtime_error("checkpoint: standardization shape mismatch");
  return c;
}

}  // namespace probsense::bayes
