#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bpop {

/// Dense row-major 2-d array, indexed (i, j).
template <typename T>
class Grid2 {
 public:
  Grid2() = default;
  Grid2(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_{rows}, cols_{cols}, data_(rows * cols, fill) {}

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }

  bool operator==(const Grid2&) const = default;

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<T> data_;
};

/// Dense row-major 3-d array indexed (county, year, race) by convention.
template <typename T>
class Grid3 {
 public:
  Grid3() = default;
  Grid3(std::size_t n0, std::size_t n1, std::size_t n2, T fill = T{})
      : n0_{n0}, n1_{n1}, n2_{n2}, data_(n0 * n1 * n2, fill) {}

  T& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * n1_ + j) * n2_ + k];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * n1_ + j) * n2_ + k];
  }

  std::size_t dim0() const noexcept { return n0_; }
  std::size_t dim1() const noexcept { return n1_; }
  std::size_t dim2() const noexcept { return n2_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }

  bool operator==(const Grid3&) const = default;

 private:
  std::size_t n0_{0};
  std::size_t n1_{0};
  std::size_t n2_{0};
  std::vector<T> data_;
};

}  // namespace bpop
