#include <gtest/gtest.h>

#include <complex>
#include <numbers>

#include "support.hpp"

using namespace pamv;
using namespace pamv::test;

namespace {

// |sum_k p[k] exp(-i 2 pi f k / fs)| evaluated directly.
double dtft_mag(const std::vector<double>& p, double f, double fs) {
  std::complex<double> s{0.0, 0.0};
  for (std::size_t k = 0; k < p.size(); ++k) {
    s += p[k] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(k) / fs);
  }
  return std::abs(s);
}

std::size_t argmax_abs(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  return best;
}

} // namespace

TEST(Pulse, MinusSixDbBandMatchesFractionalBandwidth) {
  const double fs = 20e6;
  const auto p = synth_pulse(5e6, 0.77, fs);
  double f_peak = 0.0;
  double peak = 0.0;
  for (double f = 1e6; f < 9e6; f += 1e3) {
    const double m = dtft_mag(p, f, fs);
    if (m > peak) {
      peak = m;
      f_peak = f;
    }
  }
  double lo = f_peak;
  while (dtft_mag(p, lo, fs) > 0.5 * peak) lo -= 1e3;
  double hi = f_peak;
  while (dtft_mag(p, hi, fs) > 0.5 * peak) hi += 1e3;
  EXPECT_NEAR(lo, 3.075e6, 0.05 * 3.075e6);
  EXPECT_NEAR(hi, 6.925e6, 0.05 * 6.925e6);
  EXPECT_NEAR((hi - lo) / 5e6, 0.77, 0.05 * 0.77);
}

TEST(Pulse, TruncatedNearZeroWithUnitPeak) {
  const auto p = synth_pulse(5e6, 0.77, 20e6);
  ASSERT_EQ(p.size() % 2, 1u);
  EXPECT_LT(std::abs(p.front()), 1e-4);
  EXPECT_LT(std::abs(p.back()), 1e-4);
  EXPECT_EQ(p[(p.size() - 1) / 2], 1.0);
  double energy = 0.0;
  for (double v : p) energy += v * v;
  EXPECT_GT(energy, 0.0);
}

TEST(Pulse, RejectsBandwidthOutsideUnitInterval) {
  EXPECT_THROW(synth_pulse(5e6, 0.0, 20e6), InvalidBandwidth);
  EXPECT_THROW(synth_pulse(5e6, -0.1, 20e6), InvalidBandwidth);
  EXPECT_THROW(synth_pulse(5e6, 1.2, 20e6), InvalidBandwidth);
}

TEST(Geometry, Validation) {
  EXPECT_THROW(ArrayGeometry::linear(0, 3e-4), InvalidGeometry);
  EXPECT_THROW(ArrayGeometry::linear(8, 3e-4, 1540, 10e6), InvalidGeometry);
  EXPECT_THROW(ArrayGeometry::linear(8, 3e-4, 1540, 20e6, 5e6, 0.0), InvalidBandwidth);
  auto g = ArrayGeometry::linear(4, 3e-4);
  std::swap(g.element_x[1], g.element_x[2]);
  EXPECT_THROW(g.validate(), InvalidGeometry);
}

TEST(Geometry, CentredOnZero) {
  const auto g = ArrayGeometry::linear(128, 3e-4);
  EXPECT_NEAR(g.element_x.front(), -63.5 * 3e-4, 1e-15);
  EXPECT_NEAR(g.element_x.back(), 63.5 * 3e-4, 1e-15);
}

TEST(Simulate, ArrivalSampleForBroadsideElement) {
  const auto g = ArrayGeometry::linear(1, 3e-4);
  const auto f = simulate_rf(g, point_phantom(0.0, 0.03), 40e-6);
  // 0.03 / 1540 * 2e7 = 389.61
  const auto peak = argmax_abs(f.channel(0));
  EXPECT_TRUE(peak == 389 || peak == 390) << peak;
}

TEST(Simulate, RecordCoversSeventyMillimetres) {
  const auto g = ArrayGeometry::linear(128, 3e-4);
  const auto pulse = synth_pulse(5e6, 0.77, 20e6);
  EXPECT_EQ(record_length(g, 0.07 / 1540.0), 910u + (pulse.size() - 1) / 2 + 2);
}

TEST(Simulate, AmplitudeIsLinear) {
  const auto g = small_array(8);
  const auto a = simulate_rf(g, point_phantom(1e-3, 0.02, 1.0), 30e-6);
  const auto b = simulate_rf(g, point_phantom(1e-3, 0.02, 2.0), 30e-6);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    ASSERT_EQ(b.samples[i], 2.0 * a.samples[i]);
  }
}

TEST(Simulate, ContributionsSuperpose) {
  const auto g = small_array(8);
  auto both = point_phantom(1e-3, 0.02);
  both.absorbers.push_back({{-2e-3, 0.025}, 1e-4, 0.5});
  const auto ab = simulate_rf(g, both, 30e-6);
  const auto a = simulate_rf(g, point_phantom(1e-3, 0.02), 30e-6);
  const auto b = simulate_rf(g, point_phantom(-2e-3, 0.025, 0.5), 30e-6);
  for (std::size_t i = 0; i < ab.samples.size(); ++i) {
    ASSERT_NEAR(ab.samples[i], a.samples[i] + b.samples[i], 1e-15);
  }
}

TEST(Simulate, EmptyPhantomGivesZeroFrame) {
  const auto f = simulate_rf(small_array(8), Phantom{}, 20e-6);
  EXPECT_GT(f.n_samples, 0u);
  for (double v : f.samples) ASSERT_EQ(v, 0.0);
}

TEST(Simulate, TargetBeyondRecordThrows) {
  EXPECT_THROW(simulate_rf(small_array(8), point_phantom(0, 0.05), 20e-6), TargetOutOfRange);
}

TEST(Simulate, MirroredPhantomReversesChannels) {
  const auto g = small_array(16);
  const auto a = simulate_rf(g, point_phantom(2.3e-3, 0.021), 30e-6);
  const auto b = simulate_rf(g, point_phantom(-2.3e-3, 0.021), 30e-6);
  const auto m = g.n_elements();
  for (std::size_t e = 0; e < m; ++e) {
    const auto ca = a.channel(e);
    const auto cb = b.channel(m - 1 - e);
    for (std::size_t t = 0; t < a.n_samples; ++t) {
      ASSERT_NEAR(ca[t], cb[t], 1e-12);
    }
  }
}

TEST(Simulate, PeakFallsAsOneOverDistance) {
  // 15.4 mm and 30.8 mm land on samples 200 and 400 at 20 MHz.
  const auto g = ArrayGeometry::linear(1, 3e-4);
  const auto near = simulate_rf(g, point_phantom(0, 0.0154), 30e-6);
  const auto far = simulate_rf(g, point_phantom(0, 0.0308), 30e-6);
  const double pn = std::abs(near.channel(0)[argmax_abs(near.channel(0))]);
  const double pf = std::abs(far.channel(0)[argmax_abs(far.channel(0))]);
  EXPECT_NEAR(pf / pn, 0.5, 0.02 * 0.5);
}

namespace {

RfFrame tone_frame(std::size_t m, std::size_t t) {
  RfFrame f(ArrayGeometry::linear(m, 3e-4), t);
  for (std::size_t e = 0; e < m; ++e) {
    auto ch = f.channel(e);
    for (std::size_t i = 0; i < t; ++i) {
      ch[i] = std::sin(0.37 * static_cast<double>(i) + 0.1 * static_cast<double>(e)) + 0.2;
    }
  }
  return f;
}

} // namespace

TEST(Noise, VanishingNoiseLeavesFrameUnchanged) {
  const auto f = tone_frame(8, 300);
  const auto n = add_channel_noise(f, 300.0, 3);
  EXPECT_LE(max_abs_diff(n.samples, f.samples), 1e-10 * max_abs(f.samples));
  ASSERT_TRUE(n.channel_snr_db.has_value());
  EXPECT_EQ(*n.channel_snr_db, 300.0);
}

TEST(Noise, InjectedPowerMatchesRequestedSnr) {
  const auto f = tone_frame(128, 2000);
  const auto n = add_channel_noise(f, 10.0, 42);
  double ps = 0.0;
  double pn = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < f.samples.size(); ++i) {
    if (f.samples[i] != 0.0) {
      ps += f.samples[i] * f.samples[i];
      ++count;
    }
    const double d = n.samples[i] - f.samples[i];
    pn += d * d;
  }
  ps /= static_cast<double>(count);
  pn /= static_cast<double>(f.samples.size());
  EXPECT_NEAR(10.0 * std::log10(ps / pn), 10.0, 0.5);
}

TEST(Noise, SeedDeterminesRealization) {
  const auto f = tone_frame(8, 300);
  const auto a = add_channel_noise(f, 20.0, 5);
  const auto b = add_channel_noise(f, 20.0, 5);
  const auto c = add_channel_noise(f, 20.0, 6);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
}

TEST(Noise, ChannelsDrawIndependentStreams) {
  RfFrame f(ArrayGeometry::linear(2, 3e-4), 100);
  for (double& v : f.samples) v = 1.0;
  const auto n = add_channel_noise(f, 0.0, 9);
  EXPECT_NE(max_abs_diff(n.channel(0), n.channel(1)), 0.0);
}

TEST(Noise, ZeroFrameThrows) {
  const RfFrame f(ArrayGeometry::linear(4, 3e-4), 50);
  EXPECT_THROW(add_channel_noise(f, 10.0, 1), ZeroSignal);
}
