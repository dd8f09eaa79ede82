#include "probsense/dsp/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

namespace probsense::dsp {

namespace {

constexpr double kMadToSigma = 1.4826;

double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

// One replacement pass. Returns true if any point changed.
bool hampel_pass(std::vector<double>& x, int half_window, double n_sigmas) {
  const int n = static_cast<int>(x.size());
  const std::vector<double> in = x;
  std::vector<double> window;
  std::vector<double> dev;
  bool changed = false;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half_window);
    const int hi = std::min(n - 1, i + half_window);
    window.assign(in.begin() + lo, in.begin() + hi + 1);
    const double med = median_inplace(window);
    dev.resize(window.size());
    for (std::size_t j = 0; j < window.size(); ++j)
      dev[j] = std::abs(window[j] - med);
    const double mad = median_inplace(dev);
    const double threshold = n_sigmas * kMadToSigma * mad;
    if (std::abs(in[i] - med) > threshold) {
      if (x[i] != med) {
        x[i] = med;
        changed = true;
      }
    }
  }
  return changed;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // population
};

Moments moments(std::span<const double> v) {
  Moments m;
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  double acc = 0.0;
  for (double x : v) {
    const double d = x - m.mean;
    acc += d * d;
  }
  m.variance = acc / double(v.size());
  return m;
}

// Descending stable ranks: ranks[i] is the position of item i when scores are
// sorted high to low, equal scores keeping index order.
std::vector<int> descending_ranks(std::span<const double> scores) {
  const int n = static_cast<int>(scores.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  std::vector<int> ranks(n);
  for (int pos = 0; pos < n; ++pos) ranks[idx[pos]] = pos;
  return ranks;
}

}  // namespace

TimeSeries hampel_filter(const TimeSeries& series, int half_window,
                         double n_sigmas) {
  if (half_window < 1) throw std::invalid_argument("hampel: half_window < 1");
  if (n_sigmas <= 0.0) throw std::invalid_argument("hampel: n_sigmas <= 0");
  if (series.values.size() <= 2 * std::size_t(half_window))
    throw std::invalid_argument("hampel: series shorter than the window");
  TimeSeries out = series;
  // Each pass only moves points onto window medians, so the sequence of
  // distinct states cannot cycle; the cap is a hard stop for safety.
  const int max_passes = 100;
  for (int pass = 0; pass < max_passes; ++pass) {
    if (!hampel_pass(out.values, half_window, n_sigmas)) break;
  }
  return out;
}

std::vector<int> borda_order(std::span<const double> mean_power,
                             std::span<const double> variance) {
  if (mean_power.size() != variance.size())
    throw std::invalid_argument("borda: size mismatch");
  const int n = static_cast<int>(mean_power.size());
  const std::vector<int> rank_p = descending_ranks(mean_power);
  const std::vector<int> rank_v = descending_ranks(variance);
  std::vector<int> total(n);
  for (int i = 0; i < n; ++i) total[i] = rank_p[i] + rank_v[i];
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return total[a] < total[b]; });
  return order;
}

SubcarrierRanking rank_subcarriers(
    const std::vector<std::vector<double>>& amp) {
  if (amp.empty()) throw std::invalid_argument("rank: no subcarriers");
  const std::size_t len = amp.front().size();
  SubcarrierRanking r;
  r.mean_power.reserve(amp.size());
  r.variance.reserve(amp.size());
  for (const auto& row : amp) {
    if (row.size() != len) throw std::invalid_argument("rank: ragged rows");
    double power = 0.0;
    for (double x : row) power += x * x;
    power /= double(len);
    r.mean_power.push_back(power);
    r.variance.push_back(moments(row).variance);
  }
  r.order = borda_order(r.mean_power, r.variance);
  return r;
}

TimeSeries collapse_subcarriers(const std::vector<std::vector<double>>& amp,
                                const SubcarrierRanking& ranking, int k,
                                double sample_rate_hz, CollapseInfo* info) {
  if (k < 1) throw std::invalid_argument("collapse: k < 1");
  if (amp.empty()) throw std::invalid_argument("collapse: no subcarriers");
  CollapseInfo local;
  if (k > static_cast<int>(amp.size())) {
    k = static_cast<int>(amp.size());
    local.k_clamped = true;
  }
  const std::size_t len = amp.front().size();
  std::vector<double> sum(len, 0.0);
  int used = 0;
  for (int pos = 0; pos < k; ++pos) {
    const auto& row = amp.at(ranking.order.at(pos));
    const Moments m = moments(row);
    if (m.variance == 0.0) {
      ++local.excluded_zero_variance;
      continue;
    }
    const double inv_std = 1.0 / std::sqrt(m.variance);
    for (std::size_t t = 0; t < len; ++t)
      sum[t] += (row[t] - m.mean) * inv_std;
    ++used;
  }
  if (used == 0)
    throw DegenerateSeriesError(
        "collapse: every selected subcarrier has zero variance");
  local.used_k = used;
  for (double& x : sum) x /= double(used);
  if (info) *info = local;
  return TimeSeries{std::move(sum), sample_rate_hz};
}

TimeSeries preprocess_pipeline(const csi::CsiTensor& tensor,
                               const PreprocessParams& params,
                               CollapseInfo* info) {
  tensor.validate();
  const int n_sc = tensor.n_sc;
  const int n_t = tensor.n_samples;
  // Amplitude averaged across all (tx, rx) links, one row per subcarrier.
  std::vector<std::vector<double>> amp(n_sc, std::vector<double>(n_t, 0.0));
  const int links = tensor.n_tx * tensor.n_rx;
  for (int i = 0; i < tensor.n_tx; ++i)
    for (int j = 0; j < tensor.n_rx; ++j)
      for (int s = 0; s < n_sc; ++s)
        for (int t = 0; t < n_t; ++t)
          amp[s][t] += std::abs(tensor.at(i, j, s, t)) / double(links);

  for (auto& row : amp) {
    TimeSeries ts{row, tensor.sample_rate_hz};
    row = hampel_filter(ts, params.hampel_half_window, params.hampel_n_sigmas)
              .values;
  }

  const SubcarrierRanking ranking = rank_subcarriers(amp);
  TimeSeries collapsed = collapse_subcarriers(
      amp, ranking, params.top_k, tensor.sample_rate_hz, info);

  // The averaged series has variance below one when the selected rows are not
  // perfectly correlated; a final standardization pins the output scale.
  const Moments m = moments(collapsed.values);
  if (m.variance == 0.0)
    throw DegenerateSeriesError("pipeline: collapsed series is constant");
  const double inv_std = 1.0 / std::sqrt(m.variance);
  for (double& x : collapsed.values) x = (x - m.mean) * inv_std;
  return collapsed;
}

void write_series_csv(const std::filesystem::path& path, const TimeSeries& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", s.sample_rate_hz);
  out << "# sample_rate_hz=" << buf << "\n";
  out << "sample_index,value\n";
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", s.values[i]);
    out << i << ',' << buf << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

TimeSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  TimeSeries s;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos &&
          line.find("sample_rate_hz") != std::string::npos)
        s.sample_rate_hz = std::stod(line.substr(eq + 1));
      continue;
    }
    if (!header_seen) {
      header_seen = true;  // column header row
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("malformed series row: " + line);
    s.values.push_back(std::stod(line.substr(comma + 1)));
  }
  return s;
}

}  // namespace probsense::dsp
