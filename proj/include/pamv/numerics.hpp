#pragma once

// Small dense real-symmetric linear algebra shared by the beamformers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pamv {

/// Dense symmetric matrix stored in full row-major form.
///
/// Both triangles are kept so that element access is branch-free in the
/// inner loops of the covariance and reweighting updates. Writers are expected
/// to keep the two triangles consistent; symmetrize() restores exact symmetry
/// after accumulated roundoff.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {
    if (dim == 0) {
      throw DimensionMismatch("SymMatrix dimension must be >= 1");
    }
  }

  static SymMatrix identity(std::size_t dim) {
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      m(i, i) = 1.0;
    }
    return m;
  }

  /// Builds from nested rows, rejecting non-square or asymmetric input.
  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t n = rows.size();
    SymMatrix m(n);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != n) {
        throw DimensionMismatch("SymMatrix rows must be square");
      }
      std::size_t j = 0;
      for (double v : row) {
        m(i, j++) = v;
      }
      ++i;
    }
    if (!m.is_symmetric()) {
      throw DimensionMismatch("SymMatrix input is not symmetric");
    }
    return m;
  }

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * dim_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * dim_ + j]; }

  [[nodiscard]] std::span<const double> data() const noexcept { return a_; }
  [[nodiscard]] std::span<double> data() noexcept { return a_; }

  [[nodiscard]] double trace() const noexcept {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      t += (*this)(i, i);
    }
    return t;
  }

  [[nodiscard]] double max_abs() const noexcept {
    double m = 0.0;
    for (double v : a_) {
      m = std::max(m, std::abs(v));
    }
    return m;
  }

  /// True when |a_ij - a_ji| <= rel_tol * max|a| for all pairs.
  [[nodiscard]] bool is_symmetric(double rel_tol = 1e-12) const noexcept {
    const double tol = rel_tol * max_abs();
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = i + 1; j < dim_; ++j) {
        if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) {
          return false;
        }
      }
    }
    return true;
  }

  /// Replaces A with (A + A^T) / 2.
  void symmetrize() noexcept {
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = i + 1; j < dim_; ++j) {
        const double v = 0.5 * ((*this)(i, j) + (*this)(j, i));
        (*this)(i, j) = v;
        (*this)(j, i) = v;
      }
    }
  }

  SymMatrix& operator*=(double s) noexcept {
    for (double& v : a_) {
      v *= s;
    }
    return *this;
  }

  [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const {
    if (x.size() != dim_) {
      throw DimensionMismatch("matrix-vector product: length " + std::to_string(x.size()) +
                              " != dim " + std::to_string(dim_));
    }
    std::vector<double> y(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        s += (*this)(i, j) * x[j];
      }
      y[i] = s;
    }
    return y;
  }

private:
  std::size_t dim_ = 0;
  std::vector<double> a_;
};

/// Lower-triangular Cholesky factor A = G G^T. Only the lower triangle of A is
/// read. Throws NotPositiveDefinite on the first pivot <= 0.
class Cholesky {
public:
  explicit Cholesky(const SymMatrix& a) : n_(a.dim()), g_(n_ * n_, 0.0) {
    for (std::size_t j = 0; j < n_; ++j) {
      double d = a(j, j);
      const double* gj = &g_[j * n_];
      for (std::size_t k = 0; k < j; ++k) {
        d -= gj[k] * gj[k];
      }
      if (!(d > 0.0)) {
        throw NotPositiveDefinite("Cholesky pivot " + std::to_string(j) + " is " +
                                  std::to_string(d) + " (diagonal loading missing?)");
      }
      const double djj = std::sqrt(d);
      g_[j * n_ + j] = djj;
      for (std::size_t i = j + 1; i < n_; ++i) {
        double s = a(i, j);
        const double* gi = &g_[i * n_];
        for (std::size_t k = 0; k < j; ++k) {
          s -= gi[k] * gj[k];
        }
        g_[i * n_ + j] = s / djj;
      }
    }
  }

  [[nodiscard]] std::vector<double> solve(std::span<const double> b) const {
    if (b.size() != n_) {
      throw DimensionMismatch("spd_solve: rhs length " + std::to_string(b.size()) +
                              " != dim " + std::to_string(n_));
    }
    std::vector<double> x(b.begin(), b.end());
    // G y = b
    for (std::size_t i = 0; i < n_; ++i) {
      double s = x[i];
      const double* gi = &g_[i * n_];
      for (std::size_t k = 0; k < i; ++k) {
        s -= gi[k] * x[k];
      }
      x[i] = s / gi[i];
    }
    // G^T x = y
    for (std::size_t ii = n_; ii-- > 0;) {
      double s = x[ii];
      for (std::size_t k = ii + 1; k < n_; ++k) {
        s -= g_[k * n_ + ii] * x[k];
      }
      x[ii] = s / g_[ii * n_ + ii];
    }
    return x;
  }

private:
  std::size_t n_;
  std::vector<double> g_;
};

/// Solves A x = b for symmetric positive-definite A without forming A^-1.
inline std::vector<double> spd_solve(const SymMatrix& a, std::span<const double> b) {
  if (b.size() != a.dim()) {
    throw DimensionMismatch("spd_solve: rhs length " + std::to_string(b.size()) +
                            " != dim " + std::to_string(a.dim()));
  }
  return Cholesky(a).solve(b);
}

/// True when A admits a Cholesky factorization.
inline bool is_positive_definite(const SymMatrix& a) {
  try {
    Cholesky chol(a);
    return true;
  } catch (const NotPositiveDefinite&) {
    return false;
  }
}

} // namespace pamv
