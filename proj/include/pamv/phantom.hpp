#pragma once

// Analytic point-source forward model for a linear array: pulse synthesis,
// RF channel simulation and channel-noise injection.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pamv {

struct Point {
  double x = 0.0; // [m] lateral
  double z = 0.0; // [m] depth
};

/// Linear array in the z = 0 plane, centred on x = 0.
struct ArrayGeometry {
  std::vector<double> element_x; // [m], strictly increasing
  double pitch = 3e-4;           // [m]
  double sound_speed = 1540.0;   // [m/s]
  double sampling_rate = 20e6;   // [Hz]
  double center_frequency = 5e6; // [Hz]
  double fractional_bandwidth = 0.77;

  [[nodiscard]] std::size_t n_elements() const noexcept { return element_x.size(); }
  [[nodiscard]] double wavelength() const noexcept { return sound_speed / center_frequency; }

  static ArrayGeometry linear(std::size_t n_elements, double pitch, double sound_speed = 1540.0,
                              double sampling_rate = 20e6, double center_frequency = 5e6,
                              double fractional_bandwidth = 0.77) {
    ArrayGeometry g;
    g.pitch = pitch;
    g.sound_speed = sound_speed;
    g.sampling_rate = sampling_rate;
    g.center_frequency = center_frequency;
    g.fractional_bandwidth = fractional_bandwidth;
    g.element_x.resize(n_elements);
    const double mid = 0.5 * (static_cast<double>(n_elements) - 1.0);
    for (std::size_t m = 0; m < n_elements; ++m) {
      g.element_x[m] = (static_cast<double>(m) - mid) * pitch;
    }
    g.validate();
    return g;
  }

  void validate() const {
    if (element_x.empty()) {
      throw InvalidGeometry("array must have at least one element");
    }
    for (std::size_t m = 1; m < element_x.size(); ++m) {
      if (!(element_x[m] > element_x[m - 1])) {
        throw InvalidGeometry("element positions must be strictly increasing in x");
      }
    }
    if (!(sound_speed > 0.0) || !(sampling_rate > 0.0) || !(center_frequency > 0.0)) {
      throw InvalidGeometry("sound speed, sampling rate and center frequency must be > 0");
    }
    if (!(fractional_bandwidth > 0.0) || fractional_bandwidth > 1.0) {
      throw InvalidBandwidth("fractional bandwidth must lie in (0, 1], got " +
                             std::to_string(fractional_bandwidth));
    }
    const double f_hi = center_frequency * (1.0 + fractional_bandwidth / 2.0);
    if (sampling_rate < 2.0 * f_hi) {
      throw InvalidGeometry("sampling rate " + std::to_string(sampling_rate) +
                            " Hz is below Nyquist for the pulse band (" +
                            std::to_string(2.0 * f_hi) + " Hz)");
    }
  }
};

struct Absorber {
  Point position;
  double radius = 0.0; // [m], metadata only; sources are points
  double amplitude = 1.0;
};

struct Phantom {
  std::vector<Absorber> absorbers;

  void validate() const {
    for (std::size_t j = 0; j < absorbers.size(); ++j) {
      const auto& a = absorbers[j];
      if (!(a.position.z > 0.0)) {
        throw InvalidGeometry("absorber " + std::to_string(j) + " must lie in front of the array (z > 0)");
      }
      if (a.radius < 0.0) {
        throw InvalidGeometry("absorber " + std::to_string(j) + " has negative radius");
      }
      if (!(a.amplitude > 0.0)) {
        throw InvalidGeometry("absorber " + std::to_string(j) + " amplitude must be > 0");
      }
    }
  }
};

/// Multi-channel RF record, element-major: samples[m * n_samples + t].
struct RfFrame {
  ArrayGeometry geometry;
  std::size_t n_samples = 0;
  std::vector<double> samples;
  std::optional<double> channel_snr_db;

  RfFrame() = default;
  RfFrame(ArrayGeometry g, std::size_t t)
      : geometry(std::move(g)), n_samples(t), samples(geometry.n_elements() * t, 0.0) {}

  [[nodiscard]] std::size_t n_elements() const noexcept { return geometry.n_elements(); }

  [[nodiscard]] std::span<const double> channel(std::size_t m) const noexcept {
    return {samples.data() + m * n_samples, n_samples};
  }
  [[nodiscard]] std::span<double> channel(std::size_t m) noexcept {
    return {samples.data() + m * n_samples, n_samples};
  }
};

/// Gaussian-modulated cosine pulse, centred at index (size - 1) / 2.
///
/// The Gaussian envelope exp(-t^2 / 2 sigma^2) is sized so that the magnitude
/// spectrum falls to one half (-6 dB) at f0 (1 +- bw / 2). Support stops where
/// the envelope drops below 1e-4 of its peak, so both end samples lie
/// under that level.
inline std::vector<double> synth_pulse(double f0, double fractional_bandwidth, double fs) {
  if (!(fractional_bandwidth > 0.0) || fractional_bandwidth > 1.0) {
    throw InvalidBandwidth("fractional bandwidth must lie in (0, 1], got " +
                           std::to_string(fractional_bandwidth));
  }
  if (!(f0 > 0.0) || !(fs > 0.0)) {
    throw InvalidGeometry("pulse frequencies must be positive");
  }
  // |S(f0 + df)| = exp(-(2 pi df sigma)^2 / 2) = 1/2 at df = bw f0 / 2
  const double sigma = std::sqrt(2.0 * std::log(2.0)) / (std::numbers::pi * fractional_bandwidth * f0);
  const double t_cut = sigma * std::sqrt(2.0 * std::log(1e4));
  const auto half = static_cast<std::ptrdiff_t>(std::ceil(t_cut * fs));
  std::vector<double> p(static_cast<std::size_t>(2 * half + 1));
  for (std::ptrdiff_t k = -half; k <= half; ++k) {
    const double t = static_cast<double>(k) / fs;
    p[static_cast<std::size_t>(k + half)] =
        std::exp(-t * t / (2.0 * sigma * sigma)) * std::cos(2.0 * std::numbers::pi * f0 * t);
  }
  return p;
}

/// Number of samples recorded for a time window t_max: the window itself plus
/// the pulse tail so that arrivals at t_max are fully captured.
inline std::size_t record_length(const ArrayGeometry& g, double t_max) {
  const auto pulse = synth_pulse(g.center_frequency, g.fractional_bandwidth, g.sampling_rate);
  const auto tail = (pulse.size() - 1) / 2;
  return static_cast<std::size_t>(std::ceil(t_max * g.sampling_rate)) + tail + 2;
}

/// Superposes amplitude / d * pulse(t - d / c) for every absorber and element.
/// Fractional arrival times are placed by splitting each pulse sample linearly
/// between the two neighbouring grid samples.
inline RfFrame simulate_rf(const ArrayGeometry& geometry, const Phantom& phantom, double t_max) {
  geometry.validate();
  phantom.validate();
  if (!(t_max > 0.0)) {
    throw TargetOutOfRange("t_max must be > 0");
  }
  const double c = geometry.sound_speed;
  const double fs = geometry.sampling_rate;
  for (std::size_t j = 0; j < phantom.absorbers.size(); ++j) {
    const auto& p = phantom.absorbers[j].position;
    for (double ex : geometry.element_x) {
      const double d = std::hypot(p.x - ex, p.z);
      if (d > t_max * c) {
        throw TargetOutOfRange("absorber " + std::to_string(j) + " at distance " + std::to_string(d) +
                               " m exceeds the recorded range " + std::to_string(t_max * c) + " m");
      }
    }
  }

  RfFrame frame(geometry, record_length(geometry, t_max));
  const auto pulse = synth_pulse(geometry.center_frequency, geometry.fractional_bandwidth, fs);
  const auto centre = static_cast<std::ptrdiff_t>((pulse.size() - 1) / 2);
  const auto n_t = static_cast<std::ptrdiff_t>(frame.n_samples);

  for (std::size_t m = 0; m < geometry.n_elements(); ++m) {
    auto ch = frame.channel(m);
    for (const auto& a : phantom.absorbers) {
      const double d = std::hypot(a.position.x - geometry.element_x[m], a.position.z);
      const double arrival = d / c * fs;
      const double base = std::floor(arrival);
      const double frac = arrival - base;
      const double gain = a.amplitude / d;
      const auto i0 = static_cast<std::ptrdiff_t>(base) - centre;
      for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(pulse.size()); ++k) {
        const double v = gain * pulse[static_cast<std::size_t>(k)];
        const std::ptrdiff_t t0 = i0 + k;
        if (t0 >= 0 && t0 < n_t) {
          ch[static_cast<std::size_t>(t0)] += (1.0 - frac) * v;
        }
        if (t0 + 1 >= 0 && t0 + 1 < n_t) {
          ch[static_cast<std::size_t>(t0 + 1)] += frac * v;
        }
      }
    }
  }
  return frame;
}

/// Mean square over the samples that carry signal (nonzero entries).
inline double signal_power(const RfFrame& frame) {
  double acc = 0.0;
  std::size_t n = 0;
  for (double v : frame.samples) {
    if (v != 0.0) {
      acc += v * v;
      ++n;
    }
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

/// Adds i.i.d. zero-mean Gaussian noise with variance P_sig / 10^(snr_db / 10).
/// Each channel draws from its own stream seeded by (rng_seed, channel).
inline RfFrame add_channel_noise(const RfFrame& frame, double snr_db, std::uint64_t rng_seed) {
  const double p_sig = signal_power(frame);
  if (!(p_sig > 0.0)) {
    throw ZeroSignal("cannot set a channel SNR on a frame without signal");
  }
  const double sigma = std::sqrt(p_sig / std::pow(10.0, snr_db / 10.0));
  RfFrame out = frame;
  out.channel_snr_db = snr_db;
  for (std::size_t m = 0; m < frame.n_elements(); ++m) {
    std::seed_seq seq{static_cast<std::uint32_t>(rng_seed & 0xffffffffu),
                      static_cast<std::uint32_t>(rng_seed >> 32),
                      static_cast<std::uint32_t>(m)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : out.channel(m)) {
      v += noise(rng);
    }
  }
  return out;
}

} // namespace pamv
