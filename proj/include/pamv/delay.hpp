#pragma once

// Receive delays and delayed snapshot extraction for one focal point.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "phantom.hpp"

namespace pamv {

using FocalPoint = Point;

/// One-way (photoacoustic) delays in fractional samples: |p - e_m| / c * fs.
inline std::vector<double> delay_samples(const ArrayGeometry& g, const FocalPoint& p) {
  std::vector<double> tau(g.n_elements());
  const double scale = g.sampling_rate / g.sound_speed;
  for (std::size_t m = 0; m < tau.size(); ++m) {
    tau[m] = std::hypot(p.x - g.element_x[m], p.z) * scale;
  }
  return tau;
}

/// Linear interpolation of a channel at a fractional index; reads outside the
/// record are zero.
inline double sample_at(std::span<const double> ch, double index) noexcept {
  const double fl = std::floor(index);
  const double frac = index - fl;
  const auto n = static_cast<std::ptrdiff_t>(ch.size());
  const auto i = static_cast<std::ptrdiff_t>(fl);
  const double lo = (i >= 0 && i < n) ? ch[static_cast<std::size_t>(i)] : 0.0;
  const double hi = (i + 1 >= 0 && i + 1 < n) ? ch[static_cast<std::size_t>(i + 1)] : 0.0;
  return frac == 0.0 ? lo : lo + frac * (hi - lo);
}

/// x_m(tau_m + offset) for every element, given precomputed delays.
inline std::vector<double> extract_delayed(const RfFrame& frame, std::span<const double> tau,
                                           int time_offset) {
  if (tau.size() != frame.n_elements()) {
    throw DimensionMismatch("delay vector length does not match element count");
  }
  std::vector<double> v(tau.size());
  for (std::size_t m = 0; m < tau.size(); ++m) {
    v[m] = sample_at(frame.channel(m), tau[m] + time_offset);
  }
  return v;
}

inline std::vector<double> extract_delayed(const RfFrame& frame, const FocalPoint& p, int time_offset) {
  const auto tau = delay_samples(frame.geometry, p);
  return extract_delayed(frame, tau, time_offset);
}

/// Delayed subarray snapshots for one focal point, column-major (L x n_cols).
///
/// Columns are ordered temporal-major: the block for offset n = -K comes first,
/// and within each block the subarrays run l = 0 .. M - L.
class SnapshotMatrix {
public:
  SnapshotMatrix(std::size_t subarray_len, std::size_t n_subarrays, std::size_t half_window)
      : l_(subarray_len), n_sub_(n_subarrays), k_(half_window),
        data_(subarray_len * n_subarrays * (2 * half_window + 1), 0.0) {}

  /// Arbitrary column set with K = 0 (one temporal block).
  static SnapshotMatrix from_columns(const std::vector<std::vector<double>>& cols) {
    if (cols.empty() || cols.front().empty()) {
      throw DimensionMismatch("snapshot matrix needs at least one non-empty column");
    }
    SnapshotMatrix x(cols.front().size(), cols.size(), 0);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j].size() != x.l_) {
        throw DimensionMismatch("snapshot columns must share one length");
      }
      std::copy(cols[j].begin(), cols[j].end(), x.col(j).begin());
    }
    return x;
  }

  [[nodiscard]] std::size_t subarray_len() const noexcept { return l_; }
  [[nodiscard]] std::size_t n_subarrays() const noexcept { return n_sub_; }
  [[nodiscard]] std::size_t half_window() const noexcept { return k_; }
  [[nodiscard]] std::size_t n_cols() const noexcept { return n_sub_ * (2 * k_ + 1); }

  [[nodiscard]] std::span<const double> col(std::size_t j) const noexcept { return {data_.data() + j * l_, l_}; }
  [[nodiscard]] std::span<double> col(std::size_t j) noexcept { return {data_.data() + j * l_, l_}; }

  /// First column of the zero-offset (centre-time) block.
  [[nodiscard]] std::size_t centre_block_begin() const noexcept { return k_ * n_sub_; }

  /// Copy holding only the zero-offset block (K = 0).
  [[nodiscard]] SnapshotMatrix centre_only() const {
    SnapshotMatrix c(l_, n_sub_, 0);
    const auto* src = data_.data() + centre_block_begin() * l_;
    std::copy(src, src + l_ * n_sub_, c.data_.begin());
    return c;
  }

  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

private:
  std::size_t l_;
  std::size_t n_sub_;
  std::size_t k_;
  std::vector<double> data_;
};

inline SnapshotMatrix build_snapshots(const RfFrame& frame, std::span<const double> tau,
                                      std::size_t subarray_len, std::size_t half_window) {
  const std::size_t m = frame.n_elements();
  if (subarray_len < 1 || subarray_len > m) {
    throw InvalidSubarrayLength("subarray length " + std::to_string(subarray_len) +
                                " must lie in [1, " + std::to_string(m) + "]");
  }
  const std::size_t n_sub = m - subarray_len + 1;
  SnapshotMatrix x(subarray_len, n_sub, half_window);
  const int k = static_cast<int>(half_window);
  std::size_t j = 0;
  for (int n = -k; n <= k; ++n) {
    const auto v = extract_delayed(frame, tau, n);
    for (std::size_t l = 0; l < n_sub; ++l, ++j) {
      auto c = x.col(j);
      std::copy(v.begin() + static_cast<std::ptrdiff_t>(l),
                v.begin() + static_cast<std::ptrdiff_t>(l + subarray_len), c.begin());
    }
  }
  return x;
}

inline SnapshotMatrix build_snapshots(const RfFrame& frame, const FocalPoint& p,
                                      std::size_t subarray_len, std::size_t half_window) {
  const auto tau = delay_samples(frame.geometry, p);
  return build_snapshots(frame, tau, subarray_len, half_window);
}

/// Builds snapshots directly from a delayed vector (K = 0 only).
inline SnapshotMatrix snapshots_from_vector(std::span<const double> delayed, std::size_t subarray_len) {
  if (subarray_len < 1 || subarray_len > delayed.size()) {
    throw InvalidSubarrayLength("subarray length out of range");
  }
  const std::size_t n_sub = delayed.size() - subarray_len + 1;
  SnapshotMatrix x(subarray_len, n_sub, 0);
  for (std::size_t l = 0; l < n_sub; ++l) {
    auto c = x.col(l);
    std::copy(delayed.begin() + static_cast<std::ptrdiff_t>(l),
              delayed.begin() + static_cast<std::ptrdiff_t>(l + subarray_len), c.begin());
  }
  return x;
}

} // namespace pamv
