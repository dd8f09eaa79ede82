#pragma once

#include <filesystem>
#include <string>

#include "probsense/harness/experiment.hpp"

namespace probsense::harness {

// Markdown table with one row per fold: test home, accuracy (%), mean
// predictive entropy for the no-motion and motion classes (bits), two
// decimals each. Failed folds render as "failed" with empty metric cells.
std::string render_markdown(const ExperimentReport& report);

// Lossless JSON (17-significant-digit doubles) including per-example records.
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

void save_report_json(const std::filesystem::path& path,
                      const ExperimentReport& report);
ExperimentReport load_report_json(const std::filesystem::path& path);

// Config document: {"homes": [...], "window_len", "hop", "epochs",
// "batch_size", "lr", "kl_scale", "n_mc", "T", "master_seed"}; all but
// "homes" optional. Each home is {"home_id", "recordings_per_class",
// "duration_s", "profile"} for synthesis, or {"csv": "path"} / a bare path
// string for a feature CSV.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace probsense::harness
