#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "probsense/csi/channel.hpp"

namespace probsense::dsp {

struct DegenerateSeriesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TimeSeries {
  std::vector<double> values;
  double sample_rate_hz = 0.0;
};

struct SubcarrierRanking {
  std::vector<int> order;  // best first, permutation of 0..n_sc-1
  std::vector<double> mean_power;
  std::vector<double> variance;
};

// Sliding median/MAD outlier replacement. A point whose deviation from its
// window median exceeds n_sigmas * 1.4826 * MAD is replaced by that median;
// windows are truncated at the boundaries. The pass is repeated until the
// series stops changing, so the filter is a fixed point of its own rule and
// applying it twice equals applying it once.
TimeSeries hampel_filter(const TimeSeries& series, int half_window,
                         double n_sigmas);

// Borda ranking over two descending criteria (mean power of the amplitude,
// i.e. mean squared value, and variance). Ties in a criterion take index
// order; ties in the summed rank break toward the lower subcarrier index.
SubcarrierRanking rank_subcarriers(const std::vector<std::vector<double>>& amp);

// Exposed for direct score-level checks.
std::vector<int> borda_order(std::span<const double> mean_power,
                             std::span<const double> variance);

struct CollapseInfo {
  int used_k = 0;
  int excluded_zero_variance = 0;
  bool k_clamped = false;
};

// Standardizes each of the top-k subcarrier rows to zero mean / unit variance
// and averages them into one series. Zero-variance rows are excluded (counted
// in info); if every row is excluded this throws DegenerateSeriesError.
TimeSeries collapse_subcarriers(const std::vector<std::vector<double>>& amp,
                                const SubcarrierRanking& ranking, int k,
                                double sample_rate_hz,
                                CollapseInfo* info = nullptr);

struct PreprocessParams {
  int hampel_half_window = 5;
  double hampel_n_sigmas = 3.0;
  int top_k = 5;
};

// Full reduction of one recording: amplitude, average across (tx, rx) links,
// per-subcarrier Hampel, rank, collapse top-k, then standardize the collapsed
// series. Degenerate (zero-variance) recordings surface as
// DegenerateSeriesError.
TimeSeries preprocess_pipeline(const csi::CsiTensor& tensor,
                               const PreprocessParams& params,
                               CollapseInfo* info = nullptr);

// CSV persistence: "# sample_rate_hz=<fs>" comment line, then
// sample_index,value rows.
void write_series_csv(const std::filesystem::path& path, const TimeSeries& s);
TimeSeries read_series_csv(const std::filesystem::path& path);

}  // namespace probsense::dsp
