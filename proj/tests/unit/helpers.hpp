#pragma once

#include "ripple/nn.hpp"
#include "ripple/random.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

namespace testutil {

// Relative error between two gradient tensors, measured on the whole tensor.
inline double relative_error(const ripple::nn::Matrix& a, const ripple::nn::Matrix& b) {
  const double denom = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / denom;
}

// Central differences of a scalar function with respect to every entry of
// `x`, which is perturbed in place and restored.
inline ripple::nn::Matrix numeric_gradient(ripple::nn::Matrix& x, const std::function<double()>& f,
                                           double h = 1e-5) {
  ripple::nn::Matrix g(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double saved = x(i, j);
      x(i, j) = saved + h;
      const double up = f();
      x(i, j) = saved - h;
      const double down = f();
      x(i, j) = saved;
      g(i, j) = (up - down) / (2 * h);
    }
  }
  return g;
}

inline ripple::nn::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, ripple::Rng& rng,
                                        double scale = 1.0) {
  ripple::nn::Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-scale, scale);
  return m;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() / ("ripple_test_" + name);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
