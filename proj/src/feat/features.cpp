#include "probsense/feat/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace probsense::feat {

namespace {

struct CentralMoments {
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

CentralMoments central_moments(std::span<const double> w) {
  CentralMoments c;
  const double n = double(w.size());
  for (double x : w) c.mean += x;
  c.mean /= n;
  for (double x : w) {
    const double d = x - c.mean;
    const double d2 = d * d;
    c.m2 += d2;
    c.m3 += d2 * d;
    c.m4 += d2 * d2;
  }
  c.m2 /= n;
  c.m3 /= n;
  c.m4 /= n;
  return c;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

void append_double(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

const std::array<const char*, FeatureVector::kDim>& FeatureVector::names() {
  static const std::array<const char*, kDim> kNames = {
      "sample_entropy", "skewness",       "kurtosis",         "binned_entropy",
      "fourier_entropy", "max_doppler_hz", "doppler_spread_hz"};
  return kNames;
}

std::array<double, FeatureVector::kDim> FeatureVector::as_array() const {
  return {sample_entropy, skewness,        kurtosis,         binned_entropy,
          fourier_entropy, max_doppler_hz, doppler_spread_hz};
}

bool FeatureVector::all_finite() const {
  for (double v : as_array())
    if (!std::isfinite(v)) return false;
  return true;
}

double skewness(std::span<const double> window) {
  if (window.size() < 3) throw std::invalid_argument("skewness: length < 3");
  const CentralMoments c = central_moments(window);
  if (c.m2 <= 0.0) throw DegenerateWindowError("skewness: zero variance");
  return c.m3 / std::pow(c.m2, 1.5);
}

double kurtosis(std::span<const double> window) {
  if (window.size() < 4) throw std::invalid_argument("kurtosis: length < 4");
  const CentralMoments c = central_moments(window);
  if (c.m2 <= 0.0) throw DegenerateWindowError("kurtosis: zero variance");
  return c.m4 / (c.m2 * c.m2) - 3.0;
}

double sample_entropy(std::span<const double> window, int m, double r_frac) {
  const int n = static_cast<int>(window.size());
  if (m < 1) throw std::invalid_argument("sample_entropy: m < 1");
  if (n <= m + 1) throw std::invalid_argument("sample_entropy: too short");
  if (r_frac <= 0.0) throw std::invalid_argument("sample_entropy: r <= 0");
  const CentralMoments c = central_moments(window);
  if (c.m2 <= 0.0) return 0.0;  // constant series is perfectly regular
  const double r = r_frac * std::sqrt(c.m2);

  // Both template lengths use start positions [0, n - m) so every m-template
  // can extend; this keeps A <= B and the result nonnegative.
  const int t = n - m;
  long long a = 0;
  long long b = 0;
  for (int i = 0; i < t; ++i) {
    for (int j = i + 1; j < t; ++j) {
      double dist = 0.0;
      for (int k = 0; k < m; ++k)
        dist = std::max(dist, std::abs(window[i + k] - window[j + k]));
      if (dist <= r) {
        ++b;
        if (std::abs(window[i + m] - window[j + m]) <= r) ++a;
      }
    }
  }
  if (a > 0 && b > 0) return -std::log(double(a) / double(b));
  // No extended matches: cap at the largest value a single match could give.
  const long long base = b >= 2 ? b : static_cast<long long>(t);
  if (base < 2) return 0.0;
  return std::log(double(base) * double(base - 1));
}

double binned_entropy(std::span<const double> window, int n_bins) {
  if (n_bins < 2) throw std::invalid_argument("binned_entropy: n_bins < 2");
  if (window.empty()) throw std::invalid_argument("binned_entropy: empty");
  const auto [lo_it, hi_it] = std::minmax_element(window.begin(), window.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) return 0.0;
  std::vector<long long> counts(n_bins, 0);
  const double scale = double(n_bins) / (hi - lo);
  for (double x : window) {
    int idx = static_cast<int>((x - lo) * scale);
    idx = std::clamp(idx, 0, n_bins - 1);
    ++counts[idx];
  }
  // H = log2(N) - (1/N) * sum c*log2(c), exact for power-of-two splits.
  const double n = double(window.size());
  double acc = 0.0;
  for (long long cnt : counts)
    if (cnt > 0) acc += double(cnt) * std::log2(double(cnt));
  return std::log2(n) - acc / n;
}

std::vector<double> half_spectrum_power(std::span<const double> window) {
  const int n = static_cast<int>(window.size());
  if (n < 4) throw std::invalid_argument("half_spectrum_power: length < 4");
  double mean = 0.0;
  for (double x : window) mean += x;
  mean /= double(n);
  // Bins 1 .. ceil(n/2)-1: frequencies strictly inside (0, fs/2).
  const int k_max = (n - 1) / 2;
  std::vector<double> power(k_max);
  for (int k = 1; k <= k_max; ++k) {
    const double step = 2.0 * std::numbers::pi * double(k) / double(n);
    double re = 0.0;
    double im = 0.0;
    for (int t = 0; t < n; ++t) {
      const double x = window[t] - mean;
      re += x * std::cos(step * double(t));
      im -= x * std::sin(step * double(t));
    }
    power[k - 1] = re * re + im * im;
  }
  return power;
}

double fourier_entropy(std::span<const double> window) {
  const std::vector<double> power = half_spectrum_power(window);
  double total = 0.0;
  for (double p : power) total += p;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double p : power) {
    if (p <= 0.0) continue;
    const double q = p / total;
    h -= q * std::log2(q);
  }
  return std::max(h, 0.0);
}

DopplerFeatures doppler_features(std::span<const double> window,
                                 double sample_rate_hz) {
  const int n = static_cast<int>(window.size());
  if (n < 8) throw std::invalid_argument("doppler_features: length < 8");
  if (sample_rate_hz <= 0.0)
    throw std::invalid_argument("doppler_features: sample_rate <= 0");
  const std::vector<double> power = half_spectrum_power(window);
  double total = 0.0;
  for (double p : power) total += p;
  if (total <= 0.0) return {0.0, 0.0};

  const double bin_hz = sample_rate_hz / double(n);
  int best = 0;
  double centroid = 0.0;
  for (int i = 0; i < static_cast<int>(power.size()); ++i) {
    if (power[i] > power[best]) best = i;  // ties keep the lower frequency
    centroid += power[i] * double(i + 1) * bin_hz;
  }
  centroid /= total;
  double var = 0.0;
  for (int i = 0; i < static_cast<int>(power.size()); ++i) {
    const double d = double(i + 1) * bin_hz - centroid;
    var += power[i] * d * d;
  }
  var /= total;
  return {double(best + 1) * bin_hz, std::sqrt(std::max(var, 0.0))};
}

FeatureVector featurize_window(std::span<const double> window,
                               double sample_rate_hz) {
  FeatureVector f;
  f.skewness = skewness(window);  // throws DegenerateWindowError on flat input
  f.kurtosis = kurtosis(window);
  f.sample_entropy = sample_entropy(window, kSampleEntropyM,
                                    kSampleEntropyRFrac);
  f.binned_entropy = binned_entropy(window, kBinnedEntropyBins);
  f.fourier_entropy = fourier_entropy(window);
  const DopplerFeatures d = doppler_features(window, sample_rate_hz);
  f.max_doppler_hz = d.max_doppler_hz;
  f.doppler_spread_hz = d.doppler_spread_hz;
  if (!f.all_finite())
    throw DegenerateWindowError("featurize_window: non-finite feature");
  return f;
}

FeatureMatrix featurize(const dsp::TimeSeries& series, int window_len, int hop,
                        csi::MotionLabel label, const std::string& home_id) {
  const int n = static_cast<int>(series.values.size());
  if (window_len < 8) throw std::invalid_argument("featurize: window < 8");
  if (window_len > n) throw std::invalid_argument("featurize: window > series");
  if (hop < 1) throw std::invalid_argument("featurize: hop < 1");
  FeatureMatrix out;
  for (int start = 0; start + window_len <= n; start += hop) {
    const std::span<const double> w(series.values.data() + start,
                                    std::size_t(window_len));
    try {
      out.rows.push_back(
          {featurize_window(w, series.sample_rate_hz), label, home_id});
    } catch (const DegenerateWindowError&) {
      ++out.dropped_degenerate;
    }
  }
  if (out.rows.empty())
    throw DegenerateWindowError("featurize: every window degenerate (" +
                                std::to_string(out.dropped_degenerate) +
                                " dropped)");
  return out;
}

void write_features_csv(const std::filesystem::path& path,
                        const FeatureMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "home_id,label";
  for (const char* name : FeatureVector::names()) out << ',' << name;
  out << "\n";
  for (const FeatureRow& row : matrix.rows) {
    std::string line = row.home_id;
    line += ',';
    line += std::to_string(static_cast<int>(row.label));
    for (double v : row.features.as_array()) {
      line += ',';
      append_double(line, v);
    }
    out << line << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

FeatureMatrix read_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty feature CSV: " + path.string());
  std::string expected = "home_id,label";
  for (const char* name : FeatureVector::names())
    expected += std::string(",") + name;
  if (line != expected)
    throw std::runtime_error("unexpected feature CSV header: " + line);

  FeatureMatrix out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 2 + FeatureVector::kDim)
      throw std::runtime_error("malformed feature row: " + line);
    FeatureRow row;
    row.home_id = fields[0];
    const int lab = std::stoi(fields[1]);
    if (lab != 0 && lab != 1)
      throw std::runtime_error("label must be 0 or 1: " + line);
    row.label = static_cast<csi::MotionLabel>(lab);
    std::array<double, FeatureVector::kDim> v{};
    for (int i = 0; i < FeatureVector::kDim; ++i) v[i] = std::stod(fields[2 + i]);
    row.features = {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace probsense::feat
