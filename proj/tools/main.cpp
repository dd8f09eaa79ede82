#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "probsense/bayes/checkpoint.hpp"
#include "probsense/bayes/gradcheck.hpp"
#include "probsense/bayes/predict.hpp"
#include "probsense/bayes/train.hpp"
#include "probsense/csi/channel.hpp"
#include "probsense/csi/csi_io.hpp"
#include "probsense/dsp/preprocess.hpp"
#include "probsense/feat/features.hpp"
#include "probsense/harness/experiment.hpp"
#include "probsense/harness/report.hpp"
#include "probsense/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace probsense;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw std::runtime_error("cannot create directory " + dir.string());
}

struct SynthArgs {
  fs::path out_dir;
  int homes = 4;
  int recordings_per_class = 10;
  double duration_s = 60.0;
  bool ood_last = false;
};

int cmd_synth(const SynthArgs& args, std::uint64_t seed, bool verbose) {
  ensure_dir(args.out_dir);
  json files = json::array();
  for (int h = 1; h <= args.homes; ++h) {
    const std::string home_id = "Home-" + std::to_string(h);
    const csi::HomeProfile profile =
        (args.ood_last && h == args.homes)
            ? csi::HomeProfile::kOutOfDistribution
            : csi::HomeProfile::kStandard;
    const csi::ChannelConfig base = csi::make_home(home_id, seed, profile);
    int index = 0;
    for (const csi::MotionLabel label :
         {csi::MotionLabel::kNoMotion, csi::MotionLabel::kMotion}) {
      for (int r = 0; r < args.recordings_per_class; ++r, ++index) {
        const std::uint64_t rec_seed =
            harness::recording_seed(seed, home_id, index);
        const csi::ChannelConfig cfg =
            harness::make_recording_config(base, profile, rec_seed);
        const csi::MotionScenario scenario{label, args.duration_s, home_id};
        const csi::CsiTensor tensor = csi::synth_csi(cfg, scenario, rec_seed);

        char name[128];
        std::snprintf(name, sizeof name, "%s_%s_%03d.json", home_id.c_str(),
                      std::string(csi::to_string(label)).c_str(), r);
        const fs::path header = args.out_dir / name;
        csi::write_csi(header, tensor, {home_id, label, rec_seed});
        const fs::path payload = fs::path(header).replace_extension(".bin");
        files.push_back({{"header", header.filename().string()},
                         {"payload", payload.filename().string()},
                         {"home_id", home_id},
                         {"label", std::string(csi::to_string(label))},
                         {"profile", csi::to_string(profile)},
                         {"seed", rec_seed},
                         {"header_hash", csi::file_content_hash(header)},
                         {"payload_hash", csi::file_content_hash(payload)}});
        if (verbose) std::cout << "wrote " << header.string() << "\n";
      }
    }
  }
  const json manifest{{"format", "csi-manifest-v1"},
                      {"seed", seed},
                      {"homes", args.homes},
                      {"recordings_per_class", args.recordings_per_class},
                      {"duration_s", args.duration_s},
                      {"files", std::move(files)}};
  write_text(args.out_dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "synth: " << args.homes << " homes, "
            << 2 * args.recordings_per_class << " recordings each -> "
            << (args.out_dir / "manifest.json").string() << "\n";
  return 0;
}

struct PipelineArgs {
  fs::path manifest;
  fs::path out_dir;
  int window_len = feat::kDefaultWindowLen;
  int hop = feat::kDefaultHop;
};

int cmd_pipeline(const PipelineArgs& args, bool verbose) {
  std::ifstream in(args.manifest);
  if (!in)
    throw std::runtime_error("cannot open manifest " + args.manifest.string());
  json manifest;
  in >> manifest;
  ensure_dir(args.out_dir);

  const fs::path base_dir = args.manifest.parent_path();
  std::map<std::string, feat::FeatureMatrix> per_home;
  for (const json& entry : manifest.at("files")) {
    const fs::path header = base_dir / entry.at("header").get<std::string>();
    const csi::CsiRecording rec = csi::read_csi(header);
    const dsp::TimeSeries series =
        dsp::preprocess_pipeline(rec.tensor, dsp::PreprocessParams{});
    const feat::FeatureMatrix features = feat::featurize(
        series, args.window_len, args.hop, rec.meta.label, rec.meta.home_id);
    feat::FeatureMatrix& acc = per_home[rec.meta.home_id];
    acc.rows.insert(acc.rows.end(), features.rows.begin(), features.rows.end());
    acc.dropped_degenerate += features.dropped_degenerate;
    if (verbose)
      std::cout << header.filename().string() << ": " << features.rows.size()
                << " windows\n";
  }
  if (per_home.empty()) throw std::runtime_error("manifest lists no files");
  for (const auto& [home_id, matrix] : per_home) {
    const fs::path out = args.out_dir / ("features_" + home_id + ".csv");
    feat::write_features_csv(out, matrix);
    std::cout << home_id << ": " << matrix.rows.size() << " windows, "
              << matrix.dropped_degenerate << " degenerate dropped -> "
              << out.string() << "\n";
  }
  return 0;
}

std::vector<harness::HomeDataset> load_homes(
    const std::vector<fs::path>& feature_csvs) {
  if (feature_csvs.empty())
    throw std::runtime_error("no feature CSVs supplied");
  std::vector<harness::HomeDataset> homes;
  for (const fs::path& path : feature_csvs)
    homes.push_back(harness::load_home_csv(path));
  return homes;
}

struct TrainArgs {
  std::vector<fs::path> features;
  std::string test_home;
  fs::path out_dir;
  bayes::TrainOptions options{};
};

int cmd_train(const TrainArgs& args, std::uint64_t seed, bool verbose) {
  ensure_dir(args.out_dir);
  const std::vector<harness::HomeDataset> homes = load_homes(args.features);

  std::vector<bayes::Example> train_set;
  bayes::Standardization stats;
  if (!args.test_home.empty()) {
    harness::LohoSplit split = harness::loho_split(homes, args.test_home);
    train_set = std::move(split.train);
    stats = std::move(split.standardization);
  } else {
    std::vector<std::vector<double>> rows;
    for (const harness::HomeDataset& h : homes)
      for (const feat::FeatureRow& row : h.features.rows) {
        const auto a = row.features.as_array();
        rows.emplace_back(a.begin(), a.end());
      }
    stats = bayes::Standardization::fit(rows);
    for (const harness::HomeDataset& h : homes)
      for (const feat::FeatureRow& row : h.features.rows) {
        const auto a = row.features.as_array();
        train_set.push_back({stats.apply({a.begin(), a.end()}),
                             static_cast<int>(row.label)});
      }
  }

  const std::string fold_tag =
      args.test_home.empty() ? "all" : args.test_home;
  const std::uint64_t fold_seed =
      derive_seed(derive_seed(seed, fold_tag), "fold");
  bayes::BnnModel model = bayes::BnnModel::init(
      feat::FeatureVector::kDim, 4, 2, derive_seed(fold_seed, "init"));
  const bayes::TrainHistory history =
      bayes::train(model, train_set, args.options, derive_seed(fold_seed,
                                                               "train"));

  std::string csv = "epoch,loss,accuracy\n";
  for (std::size_t e = 0; e < history.loss.size(); ++e)
    csv += std::to_string(e) + "," + fmt17(history.loss[e]) + "," +
           fmt17(history.accuracy[e]) + "\n";
  write_text(args.out_dir / "loss_history.csv", csv);

  if (history.diverged) {
    std::cerr << "training diverged after " << history.loss.size()
              << " epochs; history written, no checkpoint\n";
    return 1;
  }
  bayes::save_checkpoint(args.out_dir / "checkpoint.json",
                         {model, args.options, stats});
  if (verbose && !history.loss.empty())
    std::cout << "final loss " << history.loss.back() << ", accuracy "
              << history.accuracy.back() << "\n";
  std::cout << "train: " << train_set.size() << " examples, "
            << history.loss.size() << " epochs -> "
            << (args.out_dir / "checkpoint.json").string() << "\n";
  return 0;
}

struct EvaluateArgs {
  fs::path checkpoint;
  fs::path features;
  fs::path out_dir;
  int t_samples = 100;
};

int cmd_evaluate(const EvaluateArgs& args, std::uint64_t seed, bool verbose) {
  ensure_dir(args.out_dir);
  const bayes::Checkpoint ckpt = bayes::load_checkpoint(args.checkpoint);
  const harness::HomeDataset home = harness::load_home_csv(args.features);

  std::vector<bayes::Example> test;
  for (const feat::FeatureRow& row : home.features.rows) {
    const auto a = row.features.as_array();
    test.push_back({ckpt.standardization.apply({a.begin(), a.end()}),
                    static_cast<int>(row.label)});
  }
  const harness::FoldResult fold =
      harness::evaluate(ckpt.model, test, home.home_id, args.t_samples,
                        derive_seed(seed, "evaluate"));

  json metrics{{"test_home", fold.test_home},
               {"n_examples", fold.records.size()},
               {"accuracy_pct", fold.accuracy_pct},
               {"mean_entropy_no_motion_bits",
                fold.mean_entropy_no_motion_bits
                    ? json(*fold.mean_entropy_no_motion_bits)
                    : json(nullptr)},
               {"mean_entropy_motion_bits",
                fold.mean_entropy_motion_bits
                    ? json(*fold.mean_entropy_motion_bits)
                    : json(nullptr)}};
  write_text(args.out_dir / "metrics.json", metrics.dump(2) + "\n");

  std::string unc =
      "example_index,true_label,predicted_label,mean_prob_no_motion,"
      "mean_prob_motion,predictive_entropy_bits,aleatoric_bits,"
      "epistemic_bits\n";
  std::string samples = "example_index,sample_index,prob_no_motion,prob_motion\n";
  for (std::size_t i = 0; i < fold.records.size(); ++i) {
    const harness::ExampleRecord& rec = fold.records[i];
    unc += std::to_string(i) + "," + std::to_string(rec.true_label) + "," +
           std::to_string(rec.predicted_label) + "," +
           fmt17(rec.mean_probs[0]) + "," + fmt17(rec.mean_probs[1]) + "," +
           fmt17(rec.predictive_entropy_bits) + "," +
           fmt17(rec.aleatoric_bits) + "," + fmt17(rec.epistemic_bits) + "\n";
    for (std::size_t t = 0; t < rec.sampled_probs.size(); ++t)
      samples += std::to_string(i) + "," + std::to_string(t) + "," +
                 fmt17(rec.sampled_probs[t][0]) + "," +
                 fmt17(rec.sampled_probs[t][1]) + "\n";
  }
  write_text(args.out_dir / "uncertainty.csv", unc);
  write_text(args.out_dir / "sampled_probs.csv", samples);

  if (verbose)
    std::cout << "wrote metrics.json, uncertainty.csv, sampled_probs.csv\n";
  std::cout << "evaluate " << fold.test_home << ": accuracy "
            << fold.accuracy_pct << "% over " << fold.records.size()
            << " examples\n";
  return 0;
}

struct ReportArgs {
  fs::path config;
  fs::path from_json;
  fs::path out_dir;
};

int cmd_report(const ReportArgs& args, std::uint64_t seed, bool seed_given) {
  ensure_dir(args.out_dir);
  harness::ExperimentReport report;
  if (!args.from_json.empty()) {
    report = harness::load_report_json(args.from_json);
  } else if (!args.config.empty()) {
    harness::ExperimentConfig config =
        harness::load_experiment_config(args.config);
    if (seed_given) config.master_seed = seed;
    report = harness::run_experiment(config);
    harness::save_report_json(args.out_dir / "report.json", report);
  } else {
    throw CLI::ValidationError("report", "need --config or --from-json");
  }
  write_text(args.out_dir / "report.md", harness::render_markdown(report));
  std::cout << "report: " << report.folds.size() << " folds -> "
            << (args.out_dir / "report.md").string() << "\n";
  return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
  const bayes::BnnModel model =
      bayes::BnnModel::init(derive_seed(seed, "gradcheck-model"));
  RandomStream rng(derive_seed(seed, "gradcheck-data"));
  std::vector<bayes::Example> batch;
  for (int b = 0; b < 4; ++b) {
    bayes::Example ex;
    ex.x.resize(std::size_t(model.in_dim()));
    for (double& v : ex.x) v = rng.normal();
    ex.label = b % 2;
    batch.push_back(std::move(ex));
  }
  const bayes::NoiseBundle bundle = bayes::draw_noise_bundle(model, 1, 4, rng);
  const bayes::GradCheckResult result =
      bayes::gradient_check(model, batch, bundle, 0.5);
  std::printf("max relative gradient error: %.3e over %d parameters\n",
              result.max_rel_error, result.n_params);
  if (!result.pass)
    std::printf("worst: %s analytic %.9e numeric %.9e\n",
                result.worst_param.c_str(), result.worst_analytic,
                result.worst_numeric);
  return result.pass ? 0 : 1;
}

int cmd_kl_check(int pairs, int n, std::uint64_t seed) {
  RandomStream rng(derive_seed(seed, "kl-check"));
  double worst_ratio = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const bayes::Gaussian q{rng.uniform(-3.0, 3.0), rng.log_uniform(0.1, 3.0)};
    const bayes::Gaussian p{rng.uniform(-3.0, 3.0), rng.log_uniform(0.1, 3.0)};
    const double analytic = bayes::kl_gaussian(q, p);
    const bayes::MonteCarloEstimate est =
        bayes::kl_monte_carlo_stats(q, p, n, derive_seed(seed, "kl-mc", i));
    const double ratio =
        std::abs(est.mean - analytic) / std::max(est.std_error, 1e-300);
    worst_ratio = std::max(worst_ratio, ratio);
  }
  std::printf("worst |mc - analytic| = %.2f standard errors over %d pairs\n",
              worst_ratio, pairs);
  return worst_ratio < 5.0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian motion sensing on synthetic WiFi channel data"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  bool verbose = false;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_flag("--verbose", verbose, "chatty progress output");

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate channel recordings");
  synth->fallthrough();
  synth->add_option("--out", synth_args.out_dir, "output directory")
      ->required();
  synth->add_option("--homes", synth_args.homes, "number of homes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth
      ->add_option("--recordings", synth_args.recordings_per_class,
                   "recordings per class per home")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth
      ->add_option("--duration", synth_args.duration_s,
                   "recording length in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_flag("--ood-last", synth_args.ood_last,
                  "draw the last home from the out-of-distribution profile");

  PipelineArgs pipeline_args;
  CLI::App* pipeline =
      app.add_subcommand("pipeline", "recordings to feature CSVs");
  pipeline->fallthrough();
  pipeline->add_option("--manifest", pipeline_args.manifest,
                       "manifest.json from synth")
      ->required();
  pipeline->add_option("--out", pipeline_args.out_dir, "output directory")
      ->required();
  pipeline->add_option("--window", pipeline_args.window_len, "window length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  pipeline->add_option("--hop", pipeline_args.hop, "window hop")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "fit the variational model");
  train->fallthrough();
  train->add_option("--features", train_args.features,
                    "per-home feature CSVs")
      ->required()
      ->expected(-1);
  train->add_option("--test-home", train_args.test_home,
                    "home to hold out (default: train on all)");
  train->add_option("--out", train_args.out_dir, "output directory")
      ->required();
  train->add_option("--epochs", train_args.options.epochs, "training epochs")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train->add_option("--batch", train_args.options.batch_size, "batch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train
      ->add_option("--lr", train_args.options.rmsprop.learning_rate,
                   "learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--kl-scale", train_args.options.kl_scale,
                    "multiplier on the KL weight")
      ->capture_default_str();
  train->add_option("--n-mc", train_args.options.n_mc,
                    "Monte-Carlo samples per batch")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  EvaluateArgs eval_args;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score a checkpoint on one home");
  evaluate->fallthrough();
  evaluate->add_option("--checkpoint", eval_args.checkpoint, "checkpoint.json")
      ->required();
  evaluate->add_option("--features", eval_args.features,
                       "feature CSV of the test home")
      ->required();
  evaluate->add_option("--out", eval_args.out_dir, "output directory")
      ->required();
  evaluate->add_option("--T", eval_args.t_samples, "prediction samples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  ReportArgs report_args;
  CLI::App* report =
      app.add_subcommand("report", "leave-one-home-out experiment report");
  report->fallthrough();
  report->add_option("--config", report_args.config, "experiment config JSON");
  report->add_option("--from-json", report_args.from_json,
                     "render an existing report JSON instead of running");
  report->add_option("--out", report_args.out_dir, "output directory")
      ->required();

  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "finite-difference check of the ELBO gradients");
  gradcheck->fallthrough();

  int kl_pairs = 100;
  int kl_n = 100000;
  CLI::App* kl_check = app.add_subcommand(
      "kl-check", "Monte-Carlo validation of the analytic KL");
  kl_check->fallthrough();
  kl_check->add_option("--pairs", kl_pairs, "random Gaussian pairs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  kl_check->add_option("--n", kl_n, "samples per pair")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(synth_args, seed, verbose);
    if (*pipeline) return cmd_pipeline(pipeline_args, verbose);
    if (*train) return cmd_train(train_args, seed, verbose);
    if (*evaluate) return cmd_evaluate(eval_args, seed, verbose);
    if (*report) return cmd_report(report_args, seed, seed_opt->count() > 0);
    if (*gradcheck) return cmd_gradcheck(seed);
    if (*kl_check) return cmd_kl_check(kl_pairs, kl_n, seed);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
