#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace probsense::csi {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

enum class MotionLabel : int { kNoMotion = 0, kMotion = 1 };

std::string_view to_string(MotionLabel label);
MotionLabel motion_label_from_string(std::string_view s);

// One propagation path. A moving path is amplitude-modulated at doppler_hz
// with the given depth and phase-rotated at the same rate.
struct PathComponent {
  double amplitude = 1.0;     // > 0
  double path_length_m = 0.0; // >= 0
  bool moving = false;
  double doppler_hz = 0.0;    // 0 iff not moving
  double modulation_depth = 0.0;  // in [0, 1]
};

struct ChannelConfig {
  int n_tx = 1;
  int n_rx = 1;
  int n_subcarriers = 56;
  double sample_rate_hz = 100.0;
  double carrier_base_hz = 5.18e9;
  double subcarrier_spacing_hz = 312.5e3;
  std::vector<PathComponent> paths;
  std::vector<double> csd_delay_s;  // per tx antenna
  double sto_s = 0.0;
  double sfo_ratio = 0.0;
  double freq_offset_ratio = 0.0;
  std::vector<std::complex<double>> beamform_gain;  // n_tx * n_rx, row-major
  double noise_sigma = 0.0;  // std of the complex noise, E|n|^2 = sigma^2

  double subcarrier_freq_hz(int k) const {
    return carrier_base_hz + k * subcarrier_spacing_hz;
  }
  const std::complex<double>& gain(int tx, int rx) const {
    return beamform_gain[static_cast<std::size_t>(tx) * n_rx + rx];
  }

  // Throws std::invalid_argument on violated invariants (counts, Nyquist,
  // moving/doppler consistency, array sizes).
  void validate() const;
};

struct MotionScenario {
  MotionLabel label = MotionLabel::kNoMotion;
  double duration_s = 60.0;
  std::string home_id;

  // duration * fs must land on an integer count >= 1.
  int sample_count(double sample_rate_hz) const;
};

// 4-D complex channel tensor, row-major (tx, rx, subcarrier, sample).
struct CsiTensor {
  int n_tx = 0;
  int n_rx = 0;
  int n_sc = 0;
  int n_samples = 0;
  double sample_rate_hz = 0.0;
  std::vector<std::complex<double>> values;

  std::size_t flat_index(int tx, int rx, int sc, int t) const {
    return ((static_cast<std::size_t>(tx) * n_rx + rx) * n_sc + sc) *
               n_samples +
           t;
  }
  std::complex<double>& at(int tx, int rx, int sc, int t) {
    return values[flat_index(tx, rx, sc, t)];
  }
  const std::complex<double>& at(int tx, int rx, int sc, int t) const {
    return values[flat_index(tx, rx, sc, t)];
  }
  std::size_t size() const { return values.size(); }
  void validate() const;  // dims consistent, all values finite
};

// Real tensor with the same layout (amplitudes).
struct RealTensor {
  int n_tx = 0;
  int n_rx = 0;
  int n_sc = 0;
  int n_samples = 0;
  double sample_rate_hz = 0.0;
  std::vector<double> values;

  double& at(int tx, int rx, int sc, int t) {
    return values[((static_cast<std::size_t>(tx) * n_rx + rx) * n_sc + sc) *
                      n_samples +
                  t];
  }
  const double& at(int tx, int rx, int sc, int t) const {
    return values[((static_cast<std::size_t>(tx) * n_rx + rx) * n_sc + sc) *
                      n_samples +
                  t];
  }
};

// Synthesizes the channel tensor for one recording. Each entry is the
// coherent path sum
//   a_n * Phi_ij * exp(-j 2 pi f_k [d_n/c + tau_i + sto + sfo*freq_offset])
// with moving paths scaled by (1 + depth*sin(2 pi f_D t)) * exp(-j 2 pi f_D t),
// plus circular complex Gaussian noise of std noise_sigma. For a no-motion
// scenario all moving paths are frozen (moving=false, doppler=0) before
// synthesis. Deterministic in (config, scenario, seed).
CsiTensor synth_csi(const ChannelConfig& config, const MotionScenario& scenario,
                    std::uint64_t seed);

// Elementwise modulus.
RealTensor csi_amplitude(const CsiTensor& tensor);

enum class HomeProfile { kStandard, kOutOfDistribution };

const char* to_string(HomeProfile profile);
HomeProfile home_profile_from_string(std::string_view s);

// Randomized scattering configuration standing in for a physical home.
// Standard profile: 3-8 paths, 3-30 m, log-uniform amplitudes in [0.1, 2],
// one moving path with doppler in the human-motion band. The
// out-of-distribution profile draws every one of those parameters from a
// disjoint range (more paths, longer paths, stronger amplitudes, doppler
// 43-47 Hz, deeper modulation, 4x relative noise).
ChannelConfig make_home(std::string_view home_id, std::uint64_t seed,
                        HomeProfile profile = HomeProfile::kStandard);

// Doppler band from which per-recording motion draws should come for a home
// with the given mover frequency, clipped to the profile's legal band.
struct DopplerBand {
  double lo = 0.0;
  double hi = 0.0;
};
DopplerBand home_doppler_band(double mover_doppler_hz, HomeProfile profile);

}  // namespace probsense::csi
