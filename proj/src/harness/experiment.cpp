#include "probsense/harness/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "probsense/dsp/preprocess.hpp"
#include "probsense/rng.hpp"

namespace probsense::harness {

namespace {

std::vector<std::vector<double>> feature_arrays(
    const feat::FeatureMatrix& matrix) {
  std::vector<std::vector<double>> rows;
  rows.reserve(matrix.rows.size());
  for (const feat::FeatureRow& row : matrix.rows) {
    const auto a = row.features.as_array();
    rows.emplace_back(a.begin(), a.end());
  }
  return rows;
}

void append_examples(const HomeDataset& home,
                     const bayes::Standardization& stats,
                     std::vector<bayes::Example>& out) {
  for (const feat::FeatureRow& row : home.features.rows) {
    const auto a = row.features.as_array();
    bayes::Example ex;
    ex.x = stats.apply(std::vector<double>(a.begin(), a.end()));
    ex.label = static_cast<int>(row.label);
    out.push_back(std::move(ex));
  }
}

std::string synthetic_provenance(const SyntheticHomeSpec& spec,
                                 std::uint64_t master_seed) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s|%d|%.6f|%s|%llu", spec.home_id.c_str(),
                spec.recordings_per_class, spec.duration_s,
                csi::to_string(spec.profile),
                static_cast<unsigned long long>(master_seed));
  char out[32];
  std::snprintf(out, sizeof out, "synthetic:%016llx",
                static_cast<unsigned long long>(fnv1a(buf)));
  return out;
}

}  // namespace

void HomeDataset::validate() const {
  if (home_id.empty()) throw std::invalid_argument("home: empty id");
  if (features.rows.empty())
    throw std::invalid_argument("home " + home_id + ": no feature rows");
  if (allow_single_class) return;
  bool has[2] = {false, false};
  for (const feat::FeatureRow& row : features.rows)
    has[static_cast<int>(row.label)] = true;
  if (!has[0] || !has[1])
    throw std::invalid_argument("home " + home_id +
                                ": expected both classes present");
}

LohoSplit loho_split(const std::vector<HomeDataset>& homes,
                     const std::string& test_home) {
  if (homes.size() < 2)
    throw std::invalid_argument("loho_split: need at least 2 homes");
  const HomeDataset* held_out = nullptr;
  for (const HomeDataset& h : homes)
    if (h.home_id == test_home) held_out = &h;
  if (!held_out)
    throw std::invalid_argument("loho_split: unknown home " + test_home);

  LohoSplit split;
  split.test_home = test_home;
  std::vector<std::vector<double>> train_rows;
  for (const HomeDataset& h : homes) {
    if (h.home_id == test_home) continue;
    h.validate();
    const auto rows = feature_arrays(h.features);
    train_rows.insert(train_rows.end(), rows.begin(), rows.end());
  }
  split.standardization = bayes::Standardization::fit(train_rows);
  for (const HomeDataset& h : homes) {
    if (h.home_id == test_home) continue;
    append_examples(h, split.standardization, split.train);
  }
  append_examples(*held_out, split.standardization, split.test);
  return split;
}

FoldResult evaluate(const bayes::BnnModel& model,
                    const std::vector<bayes::Example>& test,
                    const std::string& test_home, int t_samples,
                    std::uint64_t seed) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
  FoldResult fold;
  fold.test_home = test_home;
  int hits = 0;
  double entropy_sum[2] = {0.0, 0.0};
  int class_count[2] = {0, 0};
  for (std::size_t i = 0; i < test.size(); ++i) {
    const bayes::PredictiveDistribution dist = predict(
        model, test[i].x, t_samples, derive_seed(seed, "example", i));
    ExampleRecord rec;
    rec.true_label = test[i].label;
    rec.predicted_label = dist.predicted_class();
    rec.mean_probs = dist.mean_probs;
    rec.predictive_entropy_bits = dist.predictive_entropy_bits;
    rec.aleatoric_bits = dist.aleatoric_bits;
    rec.epistemic_bits = dist.epistemic_bits;
    rec.sampled_probs = dist.samples;
    if (rec.predicted_label == rec.true_label) ++hits;
    entropy_sum[rec.true_label] += rec.predictive_entropy_bits;
    ++class_count[rec.true_label];
    fold.records.push_back(std::move(rec));
  }
  fold.accuracy_pct = 100.0 * double(hits) / double(test.size());
  if (class_count[0] > 0)
    fold.mean_entropy_no_motion_bits = entropy_sum[0] / class_count[0];
  if (class_count[1] > 0)
    fold.mean_entropy_motion_bits = entropy_sum[1] / class_count[1];
  return fold;
}

double mean_predictive_entropy(const FoldResult& fold) {
  if (fold.records.empty())
    throw std::invalid_argument("fold has no records: " + fold.test_home);
  double sum = 0.0;
  for (const ExampleRecord& rec : fold.records)
    sum += rec.predictive_entropy_bits;
  return sum / double(fold.records.size());
}

void ExperimentConfig::validate() const {
  if (homes.size() < 2)
    throw std::invalid_argument("experiment: need at least 2 homes");
  if (window_len < 8 || hop < 1)
    throw std::invalid_argument("experiment: bad window/hop");
  if (t_samples < 1) throw std::invalid_argument("experiment: t_samples < 1");
  train.validate();
}

csi::ChannelConfig make_recording_config(const csi::ChannelConfig& base,
                                         csi::HomeProfile profile,
                                         std::uint64_t rec_seed) {
  csi::ChannelConfig cfg = base;
  RandomStream mover_rng(derive_seed(rec_seed, "mover-speed"));
  for (csi::PathComponent& p : cfg.paths) {
    if (!p.moving) continue;
    const csi::DopplerBand band = csi::home_doppler_band(p.doppler_hz, profile);
    p.doppler_hz = mover_rng.uniform(band.lo, band.hi);
  }
  return cfg;
}

std::uint64_t recording_seed(std::uint64_t master_seed,
                             const std::string& home_id, int index) {
  return derive_seed(derive_seed(master_seed, home_id), "recording", index);
}

HomeDataset build_synthetic_home(const SyntheticHomeSpec& spec,
                                 std::uint64_t master_seed, int window_len,
                                 int hop) {
  if (spec.recordings_per_class < 1)
    throw std::invalid_argument("synthetic home: recordings_per_class < 1");
  const csi::ChannelConfig base =
      csi::make_home(spec.home_id, master_seed, spec.profile);

  HomeDataset home;
  home.home_id = spec.home_id;
  home.provenance = synthetic_provenance(spec, master_seed);

  int recording_index = 0;
  for (const csi::MotionLabel label :
       {csi::MotionLabel::kNoMotion, csi::MotionLabel::kMotion}) {
    for (int r = 0; r < spec.recordings_per_class; ++r, ++recording_index) {
      const std::uint64_t rec_seed =
          recording_seed(master_seed, spec.home_id, recording_index);
      const csi::ChannelConfig cfg =
          make_recording_config(base, spec.profile, rec_seed);
      const csi::MotionScenario scenario{label, spec.duration_s, spec.home_id};
      const csi::CsiTensor tensor = csi::synth_csi(cfg, scenario, rec_seed);
      const dsp::TimeSeries series =
          dsp::preprocess_pipeline(tensor, dsp::PreprocessParams{});
      const feat::FeatureMatrix rec_features =
          feat::featurize(series, window_len, hop, label, spec.home_id);
      home.features.rows.insert(home.features.rows.end(),
                                rec_features.rows.begin(),
                                rec_features.rows.end());
      home.features.dropped_degenerate += rec_features.dropped_degenerate;
    }
  }
  home.validate();
  return home;
}

HomeDataset load_home_csv(const std::filesystem::path& path) {
  HomeDataset home;
  home.features = feat::read_features_csv(path);
  home.provenance = path.string();
  if (home.features.rows.empty())
    throw std::runtime_error("no feature rows in " + path.string());
  home.home_id = home.features.rows.front().home_id;
  for (const feat::FeatureRow& row : home.features.rows)
    if (row.home_id != home.home_id)
      throw std::runtime_error("mixed home ids in " + path.string());
  home.validate();
  return home;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();

  std::vector<HomeDataset> homes;
  for (const HomeSource& source : config.homes) {
    if (source.kind == HomeSource::Kind::kSynthetic) {
      homes.push_back(build_synthetic_home(
          source.synthetic, config.master_seed, config.window_len, config.hop));
    } else {
      homes.push_back(load_home_csv(source.csv_path));
    }
  }
  std::vector<std::string> ids;
  for (const HomeDataset& h : homes) ids.push_back(h.home_id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw std::invalid_argument("experiment: duplicate home ids");

  ExperimentReport report;
  for (const std::string& test_home : ids) {
    const std::uint64_t fold_seed =
        derive_seed(derive_seed(config.master_seed, test_home), "fold");
    LohoSplit split = loho_split(homes, test_home);

    bayes::BnnModel model = bayes::BnnModel::init(
        feat::FeatureVector::kDim, 4, 2, derive_seed(fold_seed, "init"));
    const bayes::TrainHistory history = bayes::train(
        model, split.train, config.train, derive_seed(fold_seed, "train"));

    FoldResult fold;
    if (history.diverged) {
      fold.test_home = test_home;
      fold.failed = true;
    } else {
      fold = evaluate(model, split.test, test_home, config.t_samples,
                      derive_seed(fold_seed, "evaluate"));
    }
    fold.train_loss = history.loss;
    report.folds.push_back(std::move(fold));
  }
  return report;
}

}  // namespace probsense::harness
