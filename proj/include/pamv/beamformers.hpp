#pragma once

// Apodization weights for delay-and-sum, minimum variance, sparse Capon and
// the modified-sparse minimum variance (MS-MV) beamformer, together with the
// subarray-averaged beamformer output.
//
// Every weight here is real: RF samples are real and the steering vector of
// pre-delayed data is all-ones, so conjugate transposes reduce to transposes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "delay.hpp"
#include "errors.hpp"
#include "numerics.hpp"

namespace pamv {

enum class Method { DAS, MV, SC, MSMV };

inline std::string_view to_string(Method m) noexcept {
  switch (m) {
  case Method::DAS: return "das";
  case Method::MV: return "mv";
  case Method::SC: return "sc";
  case Method::MSMV: return "msmv";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "das") return Method::DAS;
  if (s == "mv") return Method::MV;
  if (s == "sc") return Method::SC;
  if (s == "msmv" || s == "ms-mv" || s == "dsmv") return Method::MSMV;
  throw ConfigError("unknown method '" + std::string(s) + "' (expected das|mv|msmv)");
}

struct WeightVector {
  std::vector<double> values;
  Method method = Method::DAS;
  int iterations_run = 0;
  bool stalled = false; // MS-MV stopped early on a numerically singular update

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
  [[nodiscard]] double sum() const noexcept { return std::accumulate(values.begin(), values.end(), 0.0); }
};

struct MsmvConfig {
  double beta = 1.0;
  int n_iter = 10;
  bool early_stop = false;
  double early_stop_tol = 1e-6;
  double epsilon_floor_rel = 1e-12;

  void validate() const {
    if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
    if (n_iter < 0) throw ConfigError("n_iter must be >= 0");
    if (!(early_stop_tol >= 0.0)) throw ConfigError("early_stop_tol must be >= 0");
    if (!(epsilon_floor_rel > 0.0)) throw ConfigError("epsilon_floor_rel must be > 0");
  }
};

inline WeightVector das_weight(std::size_t subarray_len) {
  if (subarray_len < 1) {
    throw InvalidSubarrayLength("DAS weight length must be >= 1");
  }
  return {std::vector<double>(subarray_len, 1.0 / static_cast<double>(subarray_len)), Method::DAS, 0};
}

namespace detail {

// R^-1 1 / (1^T R^-1 1)
inline std::vector<double> distortionless(const SymMatrix& r) {
  const std::vector<double> ones(r.dim(), 1.0);
  auto u = spd_solve(r, ones);
  const double s = std::accumulate(u.begin(), u.end(), 0.0);
  for (double& v : u) {
    v /= s;
  }
  return u;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

} // namespace detail

/// W = R^-1 a / (a^T R^-1 a) with a = 1.
inline WeightVector mv_weight(const SymMatrix& r_loaded) {
  return {detail::distortionless(r_loaded), Method::MV, 0};
}

/// Sparse Capon fixed point w = (R + alpha C D(w) C^T)^-1 a / (...), with C
/// the all-ones L x n_directions steering matrix and D(w) = diag(1 / |C^T w|).
/// Starts from the MV weight.
inline WeightVector sc_weight(const SymMatrix& r_loaded, double alpha, int n_iter,
                              std::size_t n_directions = 181) {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (n_iter < 1) throw ConfigError("n_iter must be >= 1");
  if (n_directions < 1) throw ConfigError("n_directions must be >= 1");
  const std::size_t l = r_loaded.dim();
  WeightVector w = mv_weight(r_loaded);
  w.method = Method::SC;
  for (int it = 0; it < n_iter; ++it) {
    // Every column of C is all-ones, so C^T w is the weight sum repeated.
    const double beampattern = std::abs(w.sum());
    const double d = 1.0 / std::max(beampattern, 1e-300);
    SymMatrix a = r_loaded;
    // (C D C^T)_ij = sum_k C_ik d C_jk = n_directions * d for every (i, j)
    const double cdc = static_cast<double>(n_directions) * d;
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < l; ++j) {
        a(i, j) += alpha * cdc;
      }
    }
    w.values = detail::distortionless(a);
    w.iterations_run = it + 1;
  }
  return w;
}

/// Diagonal of D = diag(|x_n^T W|^(p-2)) with p = 1, each magnitude floored at
/// epsilon_floor_rel * max_n |x_n^T W|.
class ReweightDiagonal {
public:
  static ReweightDiagonal all_zero_outputs() { return ReweightDiagonal{}; }
  explicit ReweightDiagonal(std::vector<double> values) : values_(std::move(values)), all_zero_(false) {}

  /// True when every output x_n^T W was exactly zero; the penalty term is then
  /// dropped and the update reduces to MV.
  [[nodiscard]] bool all_zero() const noexcept { return all_zero_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

private:
  ReweightDiagonal() = default;
  std::vector<double> values_;
  bool all_zero_ = true;
};

/// x_n^T W for every snapshot column.
inline std::vector<double> snapshot_outputs(const SnapshotMatrix& x, std::span<const double> w) {
  if (w.size() != x.subarray_len()) {
    throw DimensionMismatch("weight length " + std::to_string(w.size()) + " != subarray length " +
                            std::to_string(x.subarray_len()));
  }
  std::vector<double> y(x.n_cols());
  for (std::size_t n = 0; n < y.size(); ++n) {
    const auto c = x.col(n);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      s += c[i] * w[i];
    }
    y[n] = s;
  }
  return y;
}

inline ReweightDiagonal reweight_diagonal(std::span<const double> outputs, double epsilon_floor_rel) {
  double peak = 0.0;
  for (double y : outputs) {
    peak = std::max(peak, std::abs(y));
  }
  if (peak == 0.0) {
    return ReweightDiagonal::all_zero_outputs();
  }
  const double eps = epsilon_floor_rel * peak;
  std::vector<double> d(outputs.size());
  for (std::size_t n = 0; n < d.size(); ++n) {
    d[n] = 1.0 / std::max(std::abs(outputs[n]), eps);
  }
  return ReweightDiagonal(std::move(d));
}

inline ReweightDiagonal reweight_diagonal(const SnapshotMatrix& x, const WeightVector& w,
                                          double epsilon_floor_rel) {
  return reweight_diagonal(snapshot_outputs(x, w.values), epsilon_floor_rel);
}

/// W^T R W + beta * ||X^T W||_1
inline double msmv_objective(const SymMatrix& r, const SnapshotMatrix& x, std::span<const double> w,
                             double beta) {
  const auto rw = r.multiply(w);
  double q = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    q += w[i] * rw[i];
  }
  double l1 = 0.0;
  for (double y : snapshot_outputs(x, w)) {
    l1 += std::abs(y);
  }
  return q + beta * l1;
}

/// Modified-sparse MV: starting from the MV weight, iterate
///   W <- (R + beta X D(W) X^T)^-1 a / a^T (R + beta X D(W) X^T)^-1 a
/// for cfg.n_iter steps (or until the inf-norm step drops below
/// cfg.early_stop_tol when early stopping is on).
///
/// When `iterates` is non-null every weight, starting with the MV initializer,
/// is appended to it.
inline WeightVector msmv_weight(const SymMatrix& r_loaded, const SnapshotMatrix& x, const MsmvConfig& cfg,
                                std::vector<std::vector<double>>* iterates = nullptr) {
  cfg.validate();
  const std::size_t l = r_loaded.dim();
  if (x.subarray_len() != l) {
    throw DimensionMismatch("snapshot rows " + std::to_string(x.subarray_len()) +
                            " != covariance dimension " + std::to_string(l));
  }
  WeightVector w = mv_weight(r_loaded);
  w.method = Method::MSMV;
  if (iterates != nullptr) {
    iterates->push_back(w.values);
  }
  if (cfg.beta == 0.0) {
    // The penalty vanishes; every iterate equals the initializer.
    w.iterations_run = cfg.n_iter;
    if (iterates != nullptr) {
      for (int it = 0; it < cfg.n_iter; ++it) iterates->push_back(w.values);
    }
    return w;
  }

  SymMatrix a(l);
  for (int it = 0; it < cfg.n_iter; ++it) {
    const auto d = reweight_diagonal(x, w, cfg.epsilon_floor_rel);
    a = r_loaded;
    if (!d.all_zero()) {
      const auto& dv = d.values();
      for (std::size_t n = 0; n < x.n_cols(); ++n) {
        const auto c = x.col(n);
        const double s = cfg.beta * dv[n];
        for (std::size_t i = 0; i < l; ++i) {
          const double t = s * c[i];
          if (t == 0.0) continue;
          for (std::size_t j = i; j < l; ++j) {
            a(i, j) += t * c[j];
          }
        }
      }
      // Only the upper triangle was accumulated; R itself is symmetric.
      for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = i + 1; j < l; ++j) {
          a(j, i) = a(i, j);
        }
      }
      a.symmetrize();
    }
    std::vector<double> next;
    try {
      next = detail::distortionless(a);
    } catch (const NotPositiveDefinite&) {
      // R + beta X D X^T is PSD-plus-PD in exact arithmetic; a failed pivot
      // means D has grown so large (outputs at numerical zero) that roundoff
      // swamps R. The previous iterate is kept as the converged weight.
      w.stalled = true;
      break;
    }
    const double step = detail::max_abs_diff(next, w.values);
    w.values = std::move(next);
    w.iterations_run = it + 1;
    if (iterates != nullptr) {
      iterates->push_back(w.values);
    }
    if (cfg.early_stop && step < cfg.early_stop_tol) {
      break;
    }
  }
  return w;
}

/// Subarray-averaged output (1 / (M - L + 1)) sum_l W^T X_l over the
/// zero-offset block; the other temporal blocks only feed the covariance and
/// the sparsity penalty.
inline double beamform_output(const SnapshotMatrix& x, std::span<const double> w) {
  if (w.size() != x.subarray_len()) {
    throw DimensionMismatch("weight length " + std::to_string(w.size()) + " != subarray length " +
                            std::to_string(x.subarray_len()));
  }
  const std::size_t begin = x.centre_block_begin();
  double acc = 0.0;
  for (std::size_t l = 0; l < x.n_subarrays(); ++l) {
    const auto c = x.col(begin + l);
    for (std::size_t i = 0; i < c.size(); ++i) {
      acc += w[i] * c[i];
    }
  }
  return acc / static_cast<double>(x.n_subarrays());
}

inline double beamform_output(const SnapshotMatrix& x, const WeightVector& w) {
  return beamform_output(x, std::span<const double>(w.values));
}

} // namespace pamv
