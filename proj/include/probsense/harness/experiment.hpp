#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "probsense/bayes/checkpoint.hpp"
#include "probsense/bayes/predict.hpp"
#include "probsense/bayes/train.hpp"
#include "probsense/csi/channel.hpp"
#include "probsense/feat/features.hpp"

namespace probsense::harness {

struct HomeDataset {
  std::string home_id;
  feat::FeatureMatrix features;
  std::string provenance;  // synthetic config hash or source file path
  bool allow_single_class = false;

  void validate() const;
};

// Train rows standardized with statistics fit on the train rows alone; the
// same statistics are applied to the held-out home.
struct LohoSplit {
  std::string test_home;
  std::vector<bayes::Example> train;
  std::vector<bayes::Example> test;
  bayes::Standardization standardization;
};

LohoSplit loho_split(const std::vector<HomeDataset>& homes,
                     const std::string& test_home);

struct ExampleRecord {
  int true_label = 0;
  int predicted_label = 0;
  std::vector<double> mean_probs;
  double predictive_entropy_bits = 0.0;
  double aleatoric_bits = 0.0;
  double epistemic_bits = 0.0;
  std::vector<std::vector<double>> sampled_probs;  // T x n_classes
};

struct FoldResult {
  std::string test_home;
  bool failed = false;  // training diverged; metrics absent
  double accuracy_pct = 0.0;
  // Mean predictive entropy grouped by the TRUE label; absent when the test
  // home has no examples of that class.
  std::optional<double> mean_entropy_no_motion_bits;
  std::optional<double> mean_entropy_motion_bits;
  std::vector<double> train_loss;
  std::vector<ExampleRecord> records;
};

// Accuracy (argmax of mean probabilities, ties toward no-motion) plus
// per-true-class mean predictive entropy and per-example records.
FoldResult evaluate(const bayes::BnnModel& model,
                    const std::vector<bayes::Example>& test,
                    const std::string& test_home, int t_samples,
                    std::uint64_t seed);

// Mean predictive entropy over every record, both classes pooled.
double mean_predictive_entropy(const FoldResult& fold);

struct SyntheticHomeSpec {
  std::string home_id;
  int recordings_per_class = 10;
  double duration_s = 60.0;
  csi::HomeProfile profile = csi::HomeProfile::kStandard;
};

struct HomeSource {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  SyntheticHomeSpec synthetic;
  std::filesystem::path csv_path;
};

struct ExperimentConfig {
  std::vector<HomeSource> homes;
  int window_len = feat::kDefaultWindowLen;
  int hop = feat::kDefaultHop;
  bayes::TrainOptions train{};
  int t_samples = 100;
  std::uint64_t master_seed = 1;

  void validate() const;
};

// Per-recording channel: the home's base configuration with every mover's
// speed redrawn inside the home's band from the recording seed, so recordings
// within a class are not copies of each other.
csi::ChannelConfig make_recording_config(const csi::ChannelConfig& base,
                                         csi::HomeProfile profile,
                                         std::uint64_t recording_seed);

// Seed for recording number `index` (class-major order) of a home.
std::uint64_t recording_seed(std::uint64_t master_seed,
                             const std::string& home_id, int index);

// Synthesizes, preprocesses, and featurizes every recording of one home.
HomeDataset build_synthetic_home(const SyntheticHomeSpec& spec,
                                 std::uint64_t master_seed, int window_len,
                                 int hop);

HomeDataset load_home_csv(const std::filesystem::path& path);

struct ExperimentReport {
  std::vector<FoldResult> folds;  // sorted by test home id
};

// Full leave-one-home-out sweep: one fold per home, each trained from its own
// seed-derived stream. Diverged folds are marked failed and kept.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace probsense::harness
