#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "probsense/bayes/model.hpp"
#include "probsense/bayes/train.hpp"
#include "probsense/rng.hpp"

using namespace probsense;
using namespace probsense::bayes;

namespace {

// Two well-separated Gaussian blobs in 2-D.
std::vector<Example> blobs(int per_class, double gap, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<Example> data;
  for (int c = 0; c < 2; ++c) {
    const double center = c == 0 ? -gap : gap;
    for (int i = 0; i < per_class; ++i) {
      Example e;
      e.x = {rng.normal(center, 0.5), rng.normal(center, 0.5)};
      e.label = c;
      data.push_back(e);
    }
  }
  return data;
}

std::vector<double> flatten(BnnModel& m) {
  std::vector<double> out;
  for (const ParamView& v : param_views(m)) {
    out.insert(out.end(), v.values->begin(), v.values->end());
  }
  return out;
}

}  // namespace

TEST_CASE("zero epochs leave the model untouched") {
  BnnModel m = BnnModel::init(2, 3, 2, 71);
  const std::vector<double> before = flatten(m);
  TrainOptions opt;
  opt.epochs = 0;
  const TrainHistory h = train(m, blobs(10, 2.0, 72), opt, 73);
  CHECK(flatten(m) == before);
  CHECK(h.loss.empty());
  CHECK(h.accuracy.empty());
  CHECK(!h.diverged);
}

TEST_CASE("training is deterministic per seed") {
  const std::vector<Example> data = blobs(10, 2.0, 81);
  TrainOptions opt;
  opt.epochs = 10;

  BnnModel a = BnnModel::init(2, 4, 2, 82);
  BnnModel b = BnnModel::init(2, 4, 2, 82);
  const TrainHistory ha = train(a, data, opt, 83);
  const TrainHistory hb = train(b, data, opt, 83);
  CHECK(flatten(a) == flatten(b));
  CHECK(ha.loss == hb.loss);
  CHECK(ha.accuracy == hb.accuracy);

  BnnModel c = BnnModel::init(2, 4, 2, 82);
  train(c, data, opt, 84);
  CHECK(flatten(a) != flatten(c));
}

TEST_CASE("separable blobs reach high training accuracy") {
  const std::vector<Example> data = blobs(20, 2.0, 91);
  BnnModel m = BnnModel::init(2, 4, 2, 92);
  TrainOptions opt;
  const TrainHistory h = train(m, data, opt, 93);
  REQUIRE(!h.diverged);
  REQUIRE(h.accuracy.size() == 200);
  CHECK(h.accuracy.back() >= 0.95);
  CHECK(dataset_accuracy(m, data) >= 0.95);
  // Loss should come down substantially from its starting point.
  CHECK(h.loss.back() < h.loss.front());
}

TEST_CASE("history length matches the epoch count") {
  const std::vector<Example> data = blobs(5, 2.0, 95);
  BnnModel m = BnnModel::init(2, 3, 2, 96);
  TrainOptions opt;
  opt.epochs = 7;
  const TrainHistory h = train(m, data, opt, 97);
  CHECK(h.loss.size() == 7);
  CHECK(h.accuracy.size() == 7);
  for (double l : h.loss) CHECK(std::isfinite(l));
  for (double a : h.accuracy) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}

TEST_CASE("a blown-up posterior scale aborts as divergence") {
  const std::vector<Example> data = blobs(5, 2.0, 98);
  BnnModel m = BnnModel::init(2, 3, 2, 99);
  // sigma^2 overflows to inf, so the first KL evaluation is non-finite.
  m.layer1.w_rho[0] = 1e160;
  TrainOptions opt;
  opt.epochs = 5;
  const TrainHistory h = train(m, data, opt, 100);
  CHECK(h.diverged);
  CHECK(h.loss.empty());
}

TEST_CASE("non-finite forward intermediates also count as divergence") {
  const std::vector<Example> data = blobs(5, 2.0, 101);
  BnnModel m = BnnModel::init(2, 3, 2, 102);
  // Huge realized weights overflow the matmul during the loss forward pass.
  m.layer1.w_mean[0] = 1e200;
  m.layer2.w_mean[0] = 1e200;
  TrainOptions opt;
  opt.epochs = 3;
  const TrainHistory h = train(m, data, opt, 103);
  CHECK(h.diverged);
}

TEST_CASE("dataset accuracy uses mean-forward argmax with ties to class 0") {
  // Symmetric zero model: logits (0, 0) for any input; argmax tie -> class 0.
  BnnModel m = BnnModel::init(2, 3, 2, 104);
  for (const ParamView& v : param_views(m)) {
    if (v.name.find("mean") != std::string::npos) {
      v.values->assign(v.values->size(), 0.0);
    }
  }
  const std::vector<Example> data{{{1.0, 2.0}, 0}, {{-1.0, 0.5}, 1}};
  CHECK(dataset_accuracy(m, data) == doctest::Approx(0.5));
}

TEST_CASE("train validates inputs") {
  BnnModel m = BnnModel::init(2, 3, 2, 105);
  TrainOptions opt;
  CHECK_THROWS_AS(train(m, {}, opt, 1), std::invalid_argument);
  const std::vector<Example> wrong_dim{{{1.0, 2.0, 3.0}, 0}};
  CHECK_THROWS_AS(train(m, wrong_dim, opt, 1), std::invalid_argument);
  TrainOptions bad = opt;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train(m, blobs(3, 2.0, 1), bad, 1), std::invalid_argument);
  bad = opt;
  bad.epochs = -1;
  CHECK_THROWS_AS(train(m, blobs(3, 2.0, 1), bad, 1), std::invalid_argument);
}

TEST_CASE("stronger KL weighting keeps posterior scales wider") {
  const std::vector<Example> data = blobs(15, 2.0, 106);
  TrainOptions narrow;
  narrow.epochs = 120;
  TrainOptions wide = narrow;
  wide.kl_scale = 10.0;

  BnnModel a = BnnModel::init(2, 4, 2, 107);
  BnnModel b = BnnModel::init(2, 4, 2, 107);
  train(a, data, narrow, 108);
  train(b, data, wide, 108);

  // Compare the elementwise-median posterior std across all rho arrays.
  auto median_sigma = [](BnnModel& m) {
    std::vector<double> sigmas;
    for (const ParamView& v : param_views(m)) {
      if (v.name.find("rho") == std::string::npos) continue;
      for (double rho : *v.values) sigmas.push_back(softplus(rho));
    }
    std::nth_element(sigmas.begin(), sigmas.begin() + sigmas.size() / 2,
                     sigmas.end());
    return sigmas[sigmas.size() / 2];
  };
  CHECK(median_sigma(b) >= median_sigma(a));
}
