#pragma once

#include <filesystem>
#include <vector>

#include "probsense/bayes/model.hpp"
#include "probsense/bayes/train.hpp"

namespace probsense::bayes {

// Per-column z-score statistics, fit on training rows only.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> std;  // zero-variance columns stored as std = 1

  static Standardization fit(const std::vector<std::vector<double>>& rows);
  std::vector<double> apply(const std::vector<double>& x) const;
};

struct Checkpoint {
  BnnModel model;
  TrainOptions train_options;
  Standardization standardization;
};

// JSON with full parameter arrays; doubles are serialized with
// shortest-round-trip precision so load(save(c)) is bit-exact.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace probsense::bayes
