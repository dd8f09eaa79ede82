#include "probsense/harness/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace probsense::harness {

namespace {

using nlohmann::json;

std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string entropy_cell(const std::optional<double>& v) {
  return v ? two_decimals(*v) : "n/a";
}

json record_to_json(const ExampleRecord& rec) {
  return json{{"true_label", rec.true_label},
              {"predicted_label", rec.predicted_label},
              {"mean_probs", rec.mean_probs},
              {"predictive_entropy_bits", rec.predictive_entropy_bits},
              {"aleatoric_bits", rec.aleatoric_bits},
              {"epistemic_bits", rec.epistemic_bits},
              {"sampled_probs", rec.sampled_probs}};
}

ExampleRecord record_from_json(const json& j) {
  ExampleRecord rec;
  rec.true_label = j.at("true_label").get<int>();
  rec.predicted_label = j.at("predicted_label").get<int>();
  rec.mean_probs = j.at("mean_probs").get<std::vector<double>>();
  rec.predictive_entropy_bits = j.at("predictive_entropy_bits").get<double>();
  rec.aleatoric_bits = j.at("aleatoric_bits").get<double>();
  rec.epistemic_bits = j.at("epistemic_bits").get<double>();
  rec.sampled_probs =
      j.at("sampled_probs").get<std::vector<std::vector<double>>>();
  return rec;
}

json optional_to_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

std::optional<double> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string render_markdown(const ExperimentReport& report) {
  std::string out =
      "| Test home | Accuracy (%) | Mean entropy, no-motion (bits) | "
      "Mean entropy, motion (bits) |\n"
      "| --- | --- | --- | --- |\n";
  for (const FoldResult& fold : report.folds) {
    out += "| " + fold.test_home + " | ";
    if (fold.failed) {
      out += "failed | n/a | n/a |\n";
      continue;
    }
    out += two_decimals(fold.accuracy_pct) + " | " +
           entropy_cell(fold.mean_entropy_no_motion_bits) + " | " +
           entropy_cell(fold.mean_entropy_motion_bits) + " |\n";
  }
  return out;
}

std::string report_to_json(const ExperimentReport& report) {
  json folds = json::array();
  for (const FoldResult& fold : report.folds) {
    json records = json::array();
    for (const ExampleRecord& rec : fold.records)
      records.push_back(record_to_json(rec));
    folds.push_back(
        {{"test_home", fold.test_home},
         {"failed", fold.failed},
         {"accuracy_pct", fold.accuracy_pct},
         {"mean_entropy_no_motion_bits",
          optional_to_json(fold.mean_entropy_no_motion_bits)},
         {"mean_entropy_motion_bits",
          optional_to_json(fold.mean_entropy_motion_bits)},
         {"train_loss", fold.train_loss},
         {"records", std::move(records)}});
  }
  return json{{"folds", std::move(folds)}}.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentReport report;
  for (const json& f : j.at("folds")) {
    FoldResult fold;
    fold.test_home = f.at("test_home").get<std::string>();
    fold.failed = f.at("failed").get<bool>();
    fold.accuracy_pct = f.at("accuracy_pct").get<double>();
    fold.mean_entropy_no_motion_bits =
        optional_from_json(f.at("mean_entropy_no_motion_bits"));
    fold.mean_entropy_motion_bits =
        optional_from_json(f.at("mean_entropy_motion_bits"));
    fold.train_loss = f.at("train_loss").get<std::vector<double>>();
    for (const json& r : f.at("records"))
      fold.records.push_back(record_from_json(r));
    report.folds.push_back(std::move(fold));
  }
  return report;
}

void save_report_json(const std::filesystem::path& path,
                      const ExperimentReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << report_to_json(report);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ExperimentReport load_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return report_from_json(text);
}

ExperimentConfig config_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig config;
  for (const json& h : j.at("homes")) {
    HomeSource source;
    if (h.is_string()) {
      source.kind = HomeSource::Kind::kCsv;
      source.csv_path = h.get<std::string>();
    } else if (h.contains("csv")) {
      source.kind = HomeSource::Kind::kCsv;
      source.csv_path = h.at("csv").get<std::string>();
    } else {
      source.kind = HomeSource::Kind::kSynthetic;
      source.synthetic.home_id = h.at("home_id").get<std::string>();
      if (h.contains("recordings_per_class"))
        source.synthetic.recordings_per_class =
            h.at("recordings_per_class").get<int>();
      if (h.contains("duration_s"))
        source.synthetic.duration_s = h.at("duration_s").get<double>();
      if (h.contains("profile"))
        source.synthetic.profile =
            csi::home_profile_from_string(h.at("profile").get<std::string>());
    }
    config.homes.push_back(std::move(source));
  }
  if (j.contains("window_len")) config.window_len = j.at("window_len").get<int>();
  if (j.contains("hop")) config.hop = j.at("hop").get<int>();
  if (j.contains("epochs")) config.train.epochs = j.at("epochs").get<int>();
  if (j.contains("batch_size"))
    config.train.batch_size = j.at("batch_size").get<int>();
  if (j.contains("lr"))
    config.train.rmsprop.learning_rate = j.at("lr").get<double>();
  if (j.contains("kl_scale"))
    config.train.kl_scale = j.at("kl_scale").get<double>();
  if (j.contains("n_mc")) config.train.n_mc = j.at("n_mc").get<int>();
  if (j.contains("T")) config.t_samples = j.at("T").get<int>();
  if (j.contains("master_seed"))
    config.master_seed = j.at("master_seed").get<std::uint64_t>();
  config.validate();
  return config;
}

std::string config_to_json(const ExperimentConfig& config) {
  json homes = json::array();
  for (const HomeSource& source : config.homes) {
    if (source.kind == HomeSource::Kind::kCsv) {
      homes.push_back({{"csv", source.csv_path.string()}});
    } else {
      homes.push_back(
          {{"home_id", source.synthetic.home_id},
           {"recordings_per_class", source.synthetic.recordings_per_class},
           {"duration_s", source.synthetic.duration_s},
           {"profile", csi::to_string(source.synthetic.profile)}});
    }
  }
  const json j{{"homes", std::move(homes)},
               {"window_len", config.window_len},
               {"hop", config.hop},
               {"epochs", config.train.epochs},
               {"batch_size", config.train.batch_size},
               {"lr", config.train.rmsprop.learning_rate},
               {"kl_scale", config.train.kl_scale},
               {"n_mc", config.train.n_mc},
               {"T", config.t_samples},
               {"master_seed", config.master_seed}};
  return j.dump(2) + "\n";
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return config_from_json(text);
}

}  // namespace probsense::harness
