#pragma once

#include <pamv/pamv.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pamv::test {

// G^T G + dim I with G uniform in [-1, 1].
inline SymMatrix random_spd(std::size_t dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> g(dim * dim);
  for (double& v : g) v = u(rng);
  SymMatrix a(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += g[k * dim + i] * g[k * dim + j];
      a(i, j) = s;
      a(j, i) = s;
    }
    a(i, i) += static_cast<double>(dim);
  }
  return a;
}

inline SnapshotMatrix random_snapshots(std::size_t l, std::size_t n_cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::vector<double>> cols(n_cols, std::vector<double>(l));
  for (auto& c : cols) {
    for (double& v : c) v = n(rng);
  }
  return SnapshotMatrix::from_columns(cols);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline double sum(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v;
  return s;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("pamv-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

// Small array and phantom used where a full desk run would be too slow.
inline ArrayGeometry small_array(std::size_t m = 16, double fs = 20e6) {
  return ArrayGeometry::linear(m, 3e-4, 1540.0, fs, 5e6, 0.77);
}

inline Phantom point_phantom(double x, double z, double amplitude = 1.0) {
  Phantom p;
  p.absorbers.push_back({{x, z}, 1e-4, amplitude});
  return p;
}

} // namespace pamv::test
