#pragma once

// Image-quality metrics: SNR, lateral profiles, FWHM and peak sidelobe level.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "pipeline.hpp"

namespace pamv {

struct TargetSpec {
  std::vector<FocalPoint> targets;
  double depth_tolerance = 1e-3; // [m]
};

struct TargetMetrics {
  double depth = 0.0;                     // [m]
  std::optional<double> fwhm;             // [m]
  std::optional<double> peak_sidelobe_db; // <= 0
  std::string status = "ok";              // error kind when a metric is undefined
};

struct MetricsReport {
  Method method = Method::DAS;
  std::optional<double> snr_db;
  std::string snr_status = "ok";
  std::vector<TargetMetrics> per_target;
};

/// 20 log10((max - min) / std) over the normalized envelope plane, with the
/// population standard deviation taken over every pixel.
inline double snr(const PaImage& img) {
  const auto& e = img.envelope.v;
  if (e.empty()) {
    throw DegenerateImage("image has no envelope plane");
  }
  double mx = e.front();
  double mn = e.front();
  double mean = 0.0;
  for (double v : e) {
    mx = std::max(mx, v);
    mn = std::min(mn, v);
    mean += v;
  }
  mean /= static_cast<double>(e.size());
  double var = 0.0;
  for (double v : e) {
    var += (v - mean) * (v - mean);
  }
  var /= static_cast<double>(e.size());
  const double sd = std::sqrt(var);
  if (!(sd > 0.0) || !(mx > mn)) {
    throw DegenerateImage("image envelope is constant; SNR undefined");
  }
  return 20.0 * std::log10((mx - mn) / sd);
}

struct ProfilePoint {
  double x;        // [m]
  double value_db; // display dB
};

inline std::size_t row_for_depth(const ImageGrid& g, double depth) {
  const double dz = g.dz();
  const double lo = g.z_min - 0.5 * dz;
  const double hi = g.z_max + 0.5 * dz;
  if (depth < lo || depth > hi) {
    throw DepthOutOfGrid("depth " + std::to_string(depth) + " m outside grid [" + std::to_string(g.z_min) +
                         ", " + std::to_string(g.z_max) + "]");
  }
  if (g.nz == 1) return 0;
  const auto r = static_cast<std::ptrdiff_t>(std::lround((depth - g.z_min) / dz));
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(r, 0, static_cast<std::ptrdiff_t>(g.nz) - 1));
}

/// dB-plane row nearest `depth`, with lateral coordinates.
inline std::vector<ProfilePoint> lateral_profile(const PaImage& img, double depth) {
  const std::size_t r = row_for_depth(img.grid, depth);
  std::vector<ProfilePoint> out(img.grid.nx);
  for (std::size_t c = 0; c < img.grid.nx; ++c) {
    out[c] = {img.grid.x(c), img.db(r, c)};
  }
  return out;
}

/// Width between the half-maximum crossings on either side of `peak`,
/// located by linear interpolation between samples.
inline double fwhm_of_profile(std::span<const double> x, std::span<const double> v, std::size_t peak) {
  if (x.size() != v.size() || peak >= v.size()) {
    throw DimensionMismatch("profile coordinates and values disagree");
  }
  const double half = 0.5 * v[peak];
  if (!(v[peak] > 0.0)) {
    throw NoPeakFound("profile peak is not positive");
  }
  std::size_t a = peak;
  while (a > 0 && v[a - 1] > half) --a;
  if (a == 0) throw WidthUnbounded("profile stays above half maximum to the left edge");
  std::size_t b = peak;
  while (b + 1 < v.size() && v[b + 1] > half) ++b;
  if (b + 1 == v.size()) throw WidthUnbounded("profile stays above half maximum to the right edge");
  // crossing between a-1 (<= half) and a (> half)
  const double xl = x[a - 1] + (half - v[a - 1]) / (v[a] - v[a - 1]) * (x[a] - x[a - 1]);
  const double xr = x[b] + (v[b] - half) / (v[b] - v[b + 1]) * (x[b + 1] - x[b]);
  return xr - xl;
}

/// Peak pixel of a target: the brightest envelope pixel inside the box
/// |z - target.z| <= tol, |x - target.x| <= tol, then climbed to the local
/// maximum along its row.
struct PeakLocation {
  std::size_t row;
  std::size_t col;
};

inline PeakLocation locate_peak(const PaImage& img, const FocalPoint& target, double depth_tolerance) {
  const auto& g = img.grid;
  if (img.envelope.v.empty()) throw NoPeakFound("image has no envelope plane");
  bool found = false;
  PeakLocation best{0, 0};
  double best_v = 0.0;
  for (std::size_t r = 0; r < g.nz; ++r) {
    if (std::abs(g.z(r) - target.z) > depth_tolerance) continue;
    for (std::size_t c = 0; c < g.nx; ++c) {
      if (std::abs(g.x(c) - target.x) > depth_tolerance) continue;
      const double v = img.envelope(r, c);
      if (v > best_v) {
        best_v = v;
        best = {r, c};
        found = true;
      }
    }
  }
  if (!found) {
    throw NoPeakFound("no positive envelope within " + std::to_string(depth_tolerance) + " m of target (" +
                      std::to_string(target.x) + ", " + std::to_string(target.z) + ")");
  }
  auto c = best.col;
  while (c > 0 && img.envelope(best.row, c - 1) > img.envelope(best.row, c)) --c;
  while (c + 1 < g.nx && img.envelope(best.row, c + 1) > img.envelope(best.row, c)) ++c;
  best.col = c;
  return best;
}

/// Lateral FWHM through the target's peak row, on the linear envelope.
inline double fwhm(const PaImage& img, const FocalPoint& target, double depth_tolerance = 1e-3) {
  const auto pk = locate_peak(img, target, depth_tolerance);
  std::vector<double> xs(img.grid.nx);
  std::vector<double> vs(img.grid.nx);
  for (std::size_t c = 0; c < img.grid.nx; ++c) {
    xs[c] = img.grid.x(c);
    vs[c] = img.envelope(pk.row, c);
  }
  return fwhm_of_profile(xs, vs, pk.col);
}

/// Highest dB value outside +-exclusion of the peak, relative to the peak.
inline double peak_sidelobe_of_profile(std::span<const double> x, std::span<const double> db, std::size_t peak,
                                       double exclusion) {
  if (x.size() != db.size() || peak >= db.size()) {
    throw DimensionMismatch("profile coordinates and values disagree");
  }
  std::optional<double> side;
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (std::abs(x[i] - x[peak]) > exclusion) {
      side = side ? std::max(*side, db[i]) : db[i];
    }
  }
  if (!side) {
    throw NoPeakFound("no profile samples outside the mainlobe exclusion zone");
  }
  return std::min(0.0, *side - db[peak]);
}

/// Peak sidelobe on the dB lateral profile through the target's peak row.
/// A non-positive exclusion selects the default of 3 x FWHM.
inline double peak_sidelobe(const PaImage& img, const FocalPoint& target, double mainlobe_exclusion = 0.0,
                            double depth_tolerance = 1e-3) {
  const auto pk = locate_peak(img, target, depth_tolerance);
  if (!(mainlobe_exclusion > 0.0)) {
    mainlobe_exclusion = 3.0 * fwhm(img, target, depth_tolerance);
  }
  std::vector<double> xs(img.grid.nx);
  std::vector<double> ds(img.grid.nx);
  for (std::size_t c = 0; c < img.grid.nx; ++c) {
    xs[c] = img.grid.x(c);
    ds[c] = img.db(pk.row, c);
  }
  return peak_sidelobe_of_profile(xs, ds, pk.col, mainlobe_exclusion);
}

/// Full report; per-metric failures are recorded as status strings instead of
/// aborting the whole evaluation.
inline MetricsReport evaluate(const PaImage& img, const TargetSpec& spec) {
  MetricsReport rep;
  rep.method = img.method;
  try {
    rep.snr_db = snr(img);
  } catch (const Error& e) {
    rep.snr_status = e.kind();
  }
  for (const auto& t : spec.targets) {
    TargetMetrics tm;
    tm.depth = t.z;
    try {
      tm.fwhm = fwhm(img, t, spec.depth_tolerance);
      tm.peak_sidelobe_db = peak_sidelobe(img, t, 3.0 * *tm.fwhm, spec.depth_tolerance);
    } catch (const Error& e) {
      tm.status = e.kind();
    }
    rep.per_target.push_back(tm);
  }
  return rep;
}

} // namespace pamv
