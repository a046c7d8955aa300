// Dense row-major tensor of small order over R^d.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbitml {

class DenseTensor {
 public:
  DenseTensor() = default;
  DenseTensor(int d, int order) : d_(d), order_(order) {
    if (d < 1 || order < 1) {
      throw std::invalid_argument("DenseTensor: d and order must be >= 1");
    }
    std::size_t n = 1;
    for (int i = 0; i < order; ++i) {
      n *= static_cast<std::size_t>(d);
      if (n > kMaxEntries) {
        throw std::invalid_argument("DenseTensor: d^order exceeds 1e6 cap");
      }
    }
    v_.assign(n, 0.0);
  }

  int dim() const { return d_; }
  int order() const { return order_; }
  std::size_t size() const { return v_.size(); }

  double& operator[](std::size_t flat) { return v_[flat]; }
  double operator[](std::size_t flat) const { return v_[flat]; }

  std::size_t flat_index(std::span<const int> idx) const {
    std::size_t f = 0;
    for (int i : idx) f = f * static_cast<std::size_t>(d_) +
                          static_cast<std::size_t>(i);
    return f;
  }
  double& at(std::span<const int> idx) { return v_[flat_index(idx)]; }
  double at(std::span<const int> idx) const { return v_[flat_index(idx)]; }

  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

  DenseTensor& operator+=(const DenseTensor& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  DenseTensor& operator-=(const DenseTensor& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  DenseTensor& operator*=(double c) {
    for (auto& x : v_) x *= c;
    return *this;
  }

  /// Frobenius / Hilbert-Schmidt norm squared.
  double squared_norm() const {
    double s = 0.0;
    for (double x : v_) s += x * x;
    return s;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

  static constexpr std::size_t kMaxEntries = 1000000;

 private:
  void check_same_shape(const DenseTensor& o) const {
    if (d_ != o.d_ || order_ != o.order_) {
      throw std::invalid_argument("DenseTensor: shape mismatch");
    }
  }

  int d_ = 0;
  int order_ = 0;
  std::vector<double> v_;
};

}  // namespace orbitml
