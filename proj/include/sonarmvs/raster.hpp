#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace sonarmvs {

/// Uniformly sampled axis with samples at both extents ("aligned corners"):
/// sample i sits at first + i * (last - first) / (count - 1).
struct Axis {
  double first = 0.0;
  double last = 0.0;
  std::size_t count = 0;

  double step() const {
    return count > 1 ? (last - first) / static_cast<double>(count - 1) : 0.0;
  }
  double at(double index) const {
    return count > 1 ? first + index * (last - first) / static_cast<double>(count - 1)
                     : first;
  }
  /// Fractional index of a coordinate; out-of-range values extrapolate.
  double index_of(double value) const {
    return count > 1 ? (value - first) / (last - first) * static_cast<double>(count - 1)
                     : 0.0;
  }
  bool operator==(const Axis&) const = default;
};

/// Dense row-major 2D grid.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  const T& operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  bool operator==(const Raster&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Dense row-major 3D grid indexed (i, j, k) with k fastest.
template <typename T>
class Volume {
 public:
  Volume() = default;
  Volume(std::size_t n0, std::size_t n1, std::size_t n2, T fill = T{})
      : n0_(n0), n1_(n1), n2_(n2), data_(n0 * n1 * n2, fill) {}

  std::size_t dim0() const { return n0_; }
  std::size_t dim1() const { return n1_; }
  std::size_t dim2() const { return n2_; }
  std::size_t size() const { return data_.size(); }

  std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const {
    assert(i < n0_ && j < n1_ && k < n2_);
    return (i * n1_ + j) * n2_ + k;
  }
  T& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[offset(i, j, k)]; }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[offset(i, j, k)];
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  bool same_shape(const Volume& o) const { return n0_ == o.n0_ && n1_ == o.n1_ && n2_ == o.n2_; }
  bool operator==(const Volume&) const = default;

 private:
  std::size_t n0_ = 0;
  std::size_t n1_ = 0;
  std::size_t n2_ = 0;
  std::vector<T> data_;
};

}  // namespace sonarmvs
