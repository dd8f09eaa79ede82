#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "probsense/csi/channel.hpp"
#include "probsense/dsp/preprocess.hpp"

namespace probsense::feat {

struct DegenerateWindowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-window description: three temporal statistics and four spectral ones.
struct FeatureVector {
  double sample_entropy = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  double binned_entropy = 0.0;
  double fourier_entropy = 0.0;
  double max_doppler_hz = 0.0;
  double doppler_spread_hz = 0.0;

  static constexpr int kDim = 7;
  static const std::array<const char*, kDim>& names();
  std::array<double, kDim> as_array() const;
  bool all_finite() const;
};

struct FeatureRow {
  FeatureVector features;
  csi::MotionLabel label = csi::MotionLabel::kNoMotion;
  std::string home_id;
};

struct FeatureMatrix {
  std::vector<FeatureRow> rows;
  int dropped_degenerate = 0;
};

inline constexpr int kSampleEntropyM = 2;
inline constexpr double kSampleEntropyRFrac = 0.2;
inline constexpr int kBinnedEntropyBins = 10;
inline constexpr int kDefaultWindowLen = 200;
inline constexpr int kDefaultHop = 100;

// Fisher-Pearson g1 = m3 / m2^{3/2}, population central moments.
double skewness(std::span<const double> window);

// Excess kurtosis g2 = m4 / m2^2 - 3.
double kurtosis(std::span<const double> window);

// -ln(A/B) over Chebyshev template matches of lengths m and m+1,
// self-matches excluded, templates restricted so both lengths share the same
// start positions. r_frac scales the window standard deviation to the match
// tolerance. Zero-std windows count as perfectly regular (0); A = 0 is capped
// at ln(B*(B-1)) so the value stays finite.
double sample_entropy(std::span<const double> window, int m, double r_frac);

// Base-2 Shannon entropy of an equal-width histogram spanning [min, max].
double binned_entropy(std::span<const double> window, int n_bins);

// Power of the mean-removed window at analysis bins k = 1 .. ceil(n/2)-1
// (both DC and, for even n, the Nyquist bin fall outside). Index 0 of the
// result is bin k = 1, at frequency sample_rate / n.
std::vector<double> half_spectrum_power(std::span<const double> window);

// Base-2 Shannon entropy of the normalized half_spectrum_power distribution.
double fourier_entropy(std::span<const double> window);

struct DopplerFeatures {
  double max_doppler_hz = 0.0;
  double doppler_spread_hz = 0.0;
};

// Peak bin frequency (ties toward the lower frequency) and power-weighted
// spectral standard deviation of half_spectrum_power.
DopplerFeatures doppler_features(std::span<const double> window,
                                 double sample_rate_hz);

FeatureVector featurize_window(std::span<const double> window,
                               double sample_rate_hz);

// Sliding windows over the series; degenerate windows are dropped and
// counted. Throws DegenerateWindowError when nothing survives.
FeatureMatrix featurize(const dsp::TimeSeries& series, int window_len, int hop,
                        csi::MotionLabel label, const std::string& home_id);

// CSV with columns home_id,label,<the seven feature names>.
void write_features_csv(const std::filesystem::path& path,
                        const FeatureMatrix& matrix);
FeatureMatrix read_features_csv(const std::filesystem::path& path);

}  // namespace probsense::feat
