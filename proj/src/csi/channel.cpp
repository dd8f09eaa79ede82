#include "probsense/csi/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "probsense/rng.hpp"

namespace probsense::csi {

std::string_view to_string(MotionLabel label) {
  return label == MotionLabel::kMotion ? "motion" : "no-motion";
}

MotionLabel motion_label_from_string(std::string_view s) {
  if (s == "motion") return MotionLabel::kMotion;
  if (s == "no-motion") return MotionLabel::kNoMotion;
  throw std::invalid_argument("unknown motion label: " + std::string(s));
}

const char* to_string(HomeProfile profile) {
  return profile == HomeProfile::kOutOfDistribution ? "out-of-distribution"
                                                    : "standard";
}

HomeProfile home_profile_from_string(std::string_view s) {
  if (s == "standard") return HomeProfile::kStandard;
  if (s == "out-of-distribution") return HomeProfile::kOutOfDistribution;
  throw std::invalid_argument("unknown home profile: " + std::string(s));
}

void ChannelConfig::validate() const {
  if (n_tx < 1 || n_rx < 1 || n_subcarriers < 1) {
    throw std::invalid_argument("channel dims must be >= 1");
  }
  if (sample_rate_hz <= 0.0) {
    throw std::invalid_argument("sample_rate_hz must be positive");
  }
  if (csd_delay_s.size() != static_cast<std::size_t>(n_tx)) {
    throw std::invalid_argument("csd_delay_s must have one entry per tx");
  }
  if (beamform_gain.size() != static_cast<std::size_t>(n_tx) * n_rx) {
    throw std::invalid_argument("beamform_gain must be n_tx * n_rx");
  }
  if (noise_sigma < 0.0) {
    throw std::invalid_argument("noise_sigma must be >= 0");
  }
  if (paths.empty()) {
    throw std::invalid_argument("config needs at least one path");
  }
  const double nyquist = sample_rate_hz / 2.0;
  for (const PathComponent& p : paths) {
    if (!(p.amplitude > 0.0)) {
      throw std::invalid_argument("path amplitude must be > 0");
    }
    if (p.path_length_m < 0.0) {
      throw std::invalid_argument("path length must be >= 0");
    }
    if (p.moving != (p.doppler_hz != 0.0)) {
      throw std::invalid_argument("doppler_hz must be nonzero iff moving");
    }
    if (std::abs(p.doppler_hz) >= nyquist) {
      throw std::invalid_argument("path doppler at or above Nyquist");
    }
    if (p.modulation_depth < 0.0 || p.modulation_depth > 1.0) {
      throw std::invalid_argument("modulation_depth must be in [0, 1]");
    }
  }
}

int MotionScenario::sample_count(double sample_rate_hz) const {
  if (duration_s <= 0.0) {
    throw std::invalid_argument("scenario duration must be positive");
  }
  const double exact = duration_s * sample_rate_hz;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-6 || rounded < 1.0) {
    throw std::invalid_argument(
        "duration * sample_rate must be an integer sample count >= 1");
  }
  return static_cast<int>(rounded);
}

void CsiTensor::validate() const {
  if (n_tx < 1 || n_rx < 1 || n_sc < 1 || n_samples < 1) {
    throw std::invalid_argument("tensor dims must be >= 1");
  }
  const std::size_t expect = static_cast<std::size_t>(n_tx) * n_rx * n_sc *
                             static_cast<std::size_t>(n_samples);
  if (values.size() != expect) {
    throw std::invalid_argument("tensor value count does not match dims");
  }
  for (const std::complex<double>& v : values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("tensor contains non-finite values");
    }
  }
}

CsiTensor synth_csi(const ChannelConfig& config, const MotionScenario& scenario,
                    std::uint64_t seed) {
  config.validate();
  ChannelConfig cfg = config;
  if (scenario.label == MotionLabel::kNoMotion) {
    for (PathComponent& p : cfg.paths) {
      p.moving = false;
      p.doppler_hz = 0.0;
    }
  }

  const int n_samples = scenario.sample_count(cfg.sample_rate_hz);
  CsiTensor tensor;
  tensor.n_tx = cfg.n_tx;
  tensor.n_rx = cfg.n_rx;
  tensor.n_sc = cfg.n_subcarriers;
  tensor.n_samples = n_samples;
  tensor.sample_rate_hz = cfg.sample_rate_hz;
  tensor.values.resize(static_cast<std::size_t>(cfg.n_tx) * cfg.n_rx *
                       cfg.n_subcarriers * static_cast<std::size_t>(n_samples));

  std::vector<const PathComponent*> movers;
  for (const PathComponent& p : cfg.paths) {
    if (p.moving) movers.push_back(&p);
  }

  // Time factor per moving path, shared by every (tx, rx, subcarrier).
  std::vector<std::vector<std::complex<double>>> mover_factor(movers.size());
  for (std::size_t m = 0; m < movers.size(); ++m) {
    mover_factor[m].resize(n_samples);
    const double f_d = movers[m]->doppler_hz;
    const double depth = movers[m]->modulation_depth;
    for (int t = 0; t < n_samples; ++t) {
      const double time = t / cfg.sample_rate_hz;
      const double am = 1.0 + depth * std::sin(2.0 * M_PI * f_d * time);
      const double phase = -2.0 * M_PI * f_d * time;
      mover_factor[m][t] =
          am * std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }

  RandomStream noise(derive_seed(seed, "csi-noise"));
  // Per-component std so that E|n|^2 = noise_sigma^2.
  const double comp_sigma = cfg.noise_sigma / std::sqrt(2.0);

  for (int i = 0; i < cfg.n_tx; ++i) {
    for (int j = 0; j < cfg.n_rx; ++j) {
      const std::complex<double> gain = cfg.gain(i, j);
      for (int k = 0; k < cfg.n_subcarriers; ++k) {
        const double f_k = cfg.subcarrier_freq_hz(k);
        const double common_delay =
            cfg.csd_delay_s[i] + cfg.sto_s + cfg.sfo_ratio * cfg.freq_offset_ratio;

        std::complex<double> static_sum(0.0, 0.0);
        std::vector<std::complex<double>> mover_coef(movers.size());
        std::size_t m = 0;
        for (const PathComponent& p : cfg.paths) {
          const double phase =
              -2.0 * M_PI * f_k * (p.path_length_m / kSpeedOfLight + common_delay);
          const std::complex<double> coef =
              p.amplitude * gain *
              std::complex<double>(std::cos(phase), std::sin(phase));
          if (p.moving) {
            mover_coef[m++] = coef;
          } else {
            static_sum += coef;
          }
        }

        const std::size_t base = tensor.flat_index(i, j, k, 0);
        for (int t = 0; t < n_samples; ++t) {
          std::complex<double> h = static_sum;
          for (std::size_t mm = 0; mm < movers.size(); ++mm) {
            h += mover_coef[mm] * mover_factor[mm][t];
          }
          if (comp_sigma > 0.0) {
            h += std::complex<double>(noise.normal(0.0, comp_sigma),
                                      noise.normal(0.0, comp_sigma));
          }
          tensor.values[base + t] = h;
        }
      }
    }
  }
  return tensor;
}

RealTensor csi_amplitude(const CsiTensor& tensor) {
  RealTensor amp;
  amp.n_tx = tensor.n_tx;
  amp.n_rx = tensor.n_rx;
  amp.n_sc = tensor.n_sc;
  amp.n_samples = tensor.n_samples;
  amp.sample_rate_hz = tensor.sample_rate_hz;
  amp.values.resize(tensor.values.size());
  for (std::size_t i = 0; i < tensor.values.size(); ++i) {
    amp.values[i] = std::abs(tensor.values[i]);
  }
  return amp;
}

namespace {

struct ProfileRanges {
  int paths_lo, paths_hi;
  double len_lo, len_hi;
  double amp_lo, amp_hi;
  double doppler_lo, doppler_hi;
  double depth_lo, depth_hi;
  double noise_rel;
};

ProfileRanges ranges_for(HomeProfile profile) {
  if (profile == HomeProfile::kOutOfDistribution) {
    return {10, 14, 35.0, 60.0, 3.0, 10.0, 43.0, 47.0, 0.80, 0.95, 0.20};
  }
  return {3, 8, 3.0, 30.0, 0.1, 2.0, 5.0, 35.0, 0.30, 0.70, 0.05};
}

}  // namespace

ChannelConfig make_home(std::string_view home_id, std::uint64_t seed,
                        HomeProfile profile) {
  RandomStream rng(derive_seed(derive_seed(seed, home_id), "make-home"));
  const ProfileRanges r = ranges_for(profile);

  ChannelConfig cfg;
  cfg.n_tx = 1;
  cfg.n_rx = 1;
  cfg.n_subcarriers = 56;
  cfg.sample_rate_hz = 100.0;
  cfg.carrier_base_hz = 5.18e9;
  cfg.subcarrier_spacing_hz = 312.5e3;

  const int n_paths = static_cast<int>(rng.uniform_int(r.paths_lo, r.paths_hi));
  const int mover = static_cast<int>(rng.uniform_int(0, n_paths - 1));
  double amp_sum = 0.0;
  for (int n = 0; n < n_paths; ++n) {
    PathComponent p;
    p.amplitude = rng.log_uniform(r.amp_lo, r.amp_hi);
    p.path_length_m = rng.uniform(r.len_lo, r.len_hi);
    if (n == mover) {
      p.moving = true;
      p.doppler_hz = rng.uniform(r.doppler_lo, r.doppler_hi);
      p.modulation_depth = rng.uniform(r.depth_lo, r.depth_hi);
    }
    amp_sum += p.amplitude;
    cfg.paths.push_back(p);
  }

  cfg.csd_delay_s.assign(cfg.n_tx, 0.0);
  for (double& d : cfg.csd_delay_s) d = rng.uniform(-600e-9, 0.0);
  cfg.sto_s = rng.uniform(-1e-6, 1e-6);
  cfg.sfo_ratio = rng.uniform(-2e-5, 2e-5);
  cfg.freq_offset_ratio = rng.uniform(-2e-5, 2e-5);

  cfg.beamform_gain.resize(static_cast<std::size_t>(cfg.n_tx) * cfg.n_rx);
  for (std::complex<double>& g : cfg.beamform_gain) {
    const double mag = rng.uniform(0.5, 1.5);
    const double ph = rng.uniform(0.0, 2.0 * M_PI);
    g = std::complex<double>(mag * std::cos(ph), mag * std::sin(ph));
  }

  cfg.noise_sigma = r.noise_rel * amp_sum;
  cfg.validate();
  return cfg;
}

DopplerBand home_doppler_band(double mover_doppler_hz, HomeProfile profile) {
  const ProfileRanges r = ranges_for(profile);
  DopplerBand band;
  band.lo = std::max(r.doppler_lo - 3.0, mover_doppler_hz - 3.0);
  band.hi = std::min(r.doppler_hi + 3.0, mover_doppler_hz + 3.0);
  if (band.lo < 2.0) band.lo = 2.0;
  if (band.hi <= band.lo) band.hi = band.lo + 0.5;
  return band;
}

}  // namespace probsense::csi
