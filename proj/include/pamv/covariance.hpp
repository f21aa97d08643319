#pragma once

#include <cstddef>

#include "delay.hpp"
#include "numerics.hpp"

namespace pamv {

/// Spatially smoothed, temporally averaged sample covariance:
/// the mean outer product over every snapshot column.
inline SymMatrix estimate(const SnapshotMatrix& x) {
  const std::size_t l = x.subarray_len();
  const std::size_t n = x.n_cols();
  SymMatrix r(l);
  for (std::size_t j = 0; j < n; ++j) {
    const auto c = x.col(j);
    for (std::size_t a = 0; a < l; ++a) {
      const double ca = c[a];
      for (std::size_t b = a; b < l; ++b) {
        r(a, b) += ca * c[b];
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t a = 0; a < l; ++a) {
    for (std::size_t b = a; b < l; ++b) {
      const double v = r(a, b) * inv_n;
      r(a, b) = v;
      r(b, a) = v;
    }
  }
  return r;
}

/// R + delta * trace(R) * I.
inline SymMatrix apply_dl(SymMatrix r, double delta) {
  const double load = delta * r.trace();
  for (std::size_t i = 0; i < r.dim(); ++i) {
    r(i, i) += load;
  }
  return r;
}

/// Default loading factor 1 / (100 L).
inline double default_dl(std::size_t subarray_len) { return 1.0 / (100.0 * static_cast<double>(subarray_len)); }

} // namespace pamv
