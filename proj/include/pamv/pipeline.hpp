#pragma once

// Image formation: per-pixel beamforming over a reconstruction grid, axial
// envelope detection and log compression.

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "beamformers.hpp"
#include "covariance.hpp"
#include "delay.hpp"
#include "errors.hpp"
#include "phantom.hpp"

namespace pamv {

struct ImageGrid {
  double x_min = -10e-3;
  double x_max = 10e-3;
  double z_min = 5e-3;
  double z_max = 70e-3;
  std::size_t nx = 1;
  std::size_t nz = 1;

  void validate() const {
    if (!(x_min < x_max)) throw ConfigError("grid: x_min must be < x_max");
    if (!(z_min < z_max)) throw ConfigError("grid: z_min must be < z_max");
    if (nx < 1 || nz < 1) throw ConfigError("grid: nx and nz must be >= 1");
  }

  [[nodiscard]] double dx() const noexcept { return nx > 1 ? (x_max - x_min) / static_cast<double>(nx - 1) : 0.0; }
  [[nodiscard]] double dz() const noexcept { return nz > 1 ? (z_max - z_min) / static_cast<double>(nz - 1) : 0.0; }
  [[nodiscard]] double x(std::size_t ix) const noexcept { return x_min + static_cast<double>(ix) * dx(); }
  [[nodiscard]] double z(std::size_t iz) const noexcept { return z_min + static_cast<double>(iz) * dz(); }
  [[nodiscard]] std::size_t size() const noexcept { return nx * nz; }

  /// Grid with the given spacings starting at (x_min, z_min); the upper bounds
  /// are snapped down onto the spacing.
  static ImageGrid with_spacing(double x_min, double x_max, double z_min, double z_max, double dx, double dz) {
    ImageGrid g{x_min, x_max, z_min, z_max, 1, 1};
    g.nx = static_cast<std::size_t>(std::floor((x_max - x_min) / dx + 1e-9)) + 1;
    g.nz = static_cast<std::size_t>(std::floor((z_max - z_min) / dz + 1e-9)) + 1;
    g.x_max = x_min + static_cast<double>(g.nx - 1) * dx;
    g.z_max = z_min + static_cast<double>(g.nz - 1) * dz;
    return g;
  }
};

/// Dense row-major real plane, rows = depth (nz), cols = lateral (nx).
struct Plane {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) noexcept { return v[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return v[r * cols + c]; }
};

enum class PenaltyWindow { Full, Centre };

struct ReconstructionParams {
  std::size_t subarray_len = 0;          // 0: M / 2
  std::size_t half_window = 2;           // K
  std::optional<double> dl;              // default 1 / (100 L)
  MsmvConfig msmv;
  PenaltyWindow penalty_window = PenaltyWindow::Full;
  unsigned workers = 0;                  // 0: hardware concurrency

  [[nodiscard]] std::size_t resolved_subarray_len(std::size_t n_elements) const noexcept {
    return subarray_len == 0 ? std::max<std::size_t>(1, n_elements / 2) : subarray_len;
  }
  [[nodiscard]] double resolved_dl(std::size_t n_elements) const noexcept {
    return dl.value_or(default_dl(resolved_subarray_len(n_elements)));
  }
};

struct PaImage {
  ImageGrid grid;
  Method method = Method::DAS;
  Plane beamformed;      // raw beamformer output per pixel
  Plane envelope;        // normalized to a maximum of 1 (all-zero stays zero)
  Plane db;              // 20 log10(envelope), clamped to [-dynamic_range_db, 0]
  double dynamic_range_db = 50.0;
  std::size_t fallback_pixel_count = 0;
};

namespace detail {

struct PixelResult {
  double value;
  bool fallback;
};

inline double das_value(const RfFrame& frame, std::span<const double> tau) {
  const auto v = extract_delayed(frame, tau, 0);
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline PixelResult beamform_pixel(const RfFrame& frame, const FocalPoint& p, Method method, std::size_t l,
                                  double dl, const ReconstructionParams& params) {
  const auto tau = delay_samples(frame.geometry, p);
  if (method == Method::DAS) {
    return {das_value(frame, tau), false};
  }
  const auto x = build_snapshots(frame, tau, l, params.half_window);
  try {
    const auto r = apply_dl(estimate(x), dl);
    WeightVector w;
    switch (method) {
    case Method::MV:
      w = mv_weight(r);
      break;
    case Method::SC:
      w = sc_weight(r, 1.0, params.msmv.n_iter);
      break;
    case Method::MSMV:
      if (params.penalty_window == PenaltyWindow::Centre) {
        w = msmv_weight(r, x.centre_only(), params.msmv);
      } else {
        w = msmv_weight(r, x, params.msmv);
      }
      break;
    case Method::DAS:
      break;
    }
    return {beamform_output(x, w), false};
  } catch (const NotPositiveDefinite&) {
    return {das_value(frame, tau), true};
  }
}

} // namespace detail

/// Beamforms every grid pixel with per-pixel focusing. Fills the beamformed
/// plane and the fallback counter; envelope and db planes are left empty.
///
/// DAS is the full-aperture uniform sum scaled by 1/M. The adaptive methods
/// use spatial smoothing over length-L subarrays with 2K+1 temporal snapshots;
/// pixels whose loaded covariance is not positive definite get the DAS value
/// and are counted in fallback_pixel_count.
inline PaImage reconstruct(const RfFrame& frame, const ImageGrid& grid, Method method,
                           const ReconstructionParams& params) {
  grid.validate();
  params.msmv.validate();
  const std::size_t m = frame.n_elements();
  const std::size_t l = params.resolved_subarray_len(m);
  if (l < 1 || l > m) {
    throw ConfigError("subarray length L=" + std::to_string(l) + " must lie in [1, M=" + std::to_string(m) + "]");
  }
  const double dl = params.resolved_dl(m);
  if (!(dl >= 0.0)) {
    throw ConfigError("diagonal loading factor must be >= 0");
  }

  PaImage img;
  img.grid = grid;
  img.method = method;
  img.beamformed = Plane(grid.nz, grid.nx);

  unsigned workers = params.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : params.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, grid.nz));

  std::vector<std::size_t> fallbacks(workers, 0);
  auto run_rows = [&](unsigned w) {
    for (std::size_t iz = w; iz < grid.nz; iz += workers) {
      for (std::size_t ix = 0; ix < grid.nx; ++ix) {
        const auto r = detail::beamform_pixel(frame, {grid.x(ix), grid.z(iz)}, method, l, dl, params);
        img.beamformed(iz, ix) = r.value;
        fallbacks[w] += r.fallback ? 1 : 0;
      }
    }
  };
  if (workers <= 1) {
    run_rows(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back(run_rows, w);
    }
  }
  for (auto f : fallbacks) img.fallback_pixel_count += f;
  return img;
}

/// Magnitude of the analytic signal of every column (depth direction).
///
/// Uses an FFTW plan; FFTW planning is not thread-safe, so call this from one
/// thread at a time.
inline Plane envelope_detect(const Plane& beamformed) {
  Plane env(beamformed.rows, beamformed.cols);
  const std::size_t n = beamformed.rows;
  if (n == 0 || beamformed.cols == 0) return env;

  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  const int ni = static_cast<int>(n);
  fftw_plan fwd = fftw_plan_dft_1d(ni, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan inv = fftw_plan_dft_1d(ni, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);

  for (std::size_t c = 0; c < beamformed.cols; ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      buf[r][0] = beamformed(r, c);
      buf[r][1] = 0.0;
    }
    fftw_execute(fwd);
    // Keep DC (and Nyquist for even n) once, double positive, zero negative.
    const std::size_t half = n / 2;
    for (std::size_t k = 1; k < n; ++k) {
      double g = 0.0;
      if (k < half || (n % 2 == 1 && k == half)) {
        g = 2.0;
      } else if (n % 2 == 0 && k == half) {
        g = 1.0;
      }
      buf[k][0] *= g;
      buf[k][1] *= g;
    }
    fftw_execute(inv);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      env(r, c) = std::hypot(buf[r][0], buf[r][1]) * inv_n;
    }
  }
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(inv);
  fftw_free(buf);
  return env;
}

/// Normalizes by the global maximum and maps to dB, clamped at -dynamic_range_db.
inline Plane log_compress(const Plane& envelope, double dynamic_range_db) {
  if (!(dynamic_range_db > 0.0)) {
    throw ConfigError("dynamic range must be > 0 dB");
  }
  Plane db(envelope.rows, envelope.cols, -dynamic_range_db);
  double peak = 0.0;
  for (double e : envelope.v) peak = std::max(peak, e);
  if (peak <= 0.0) return db;
  for (std::size_t i = 0; i < envelope.v.size(); ++i) {
    const double ratio = envelope.v[i] / peak;
    db.v[i] = ratio > 0.0 ? std::max(20.0 * std::log10(ratio), -dynamic_range_db) : -dynamic_range_db;
  }
  return db;
}

/// Fills the normalized envelope and dB planes from the beamformed plane.
inline void finalize_image(PaImage& img, double dynamic_range_db) {
  img.dynamic_range_db = dynamic_range_db;
  img.envelope = envelope_detect(img.beamformed);
  double peak = 0.0;
  for (double e : img.envelope.v) peak = std::max(peak, e);
  if (peak > 0.0) {
    for (double& e : img.envelope.v) e /= peak;
  }
  img.db = log_compress(img.envelope, dynamic_range_db);
}

} // namespace pamv
