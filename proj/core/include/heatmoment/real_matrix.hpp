#pragma once

#include <cstddef>
#include <vector>

#include "heatmoment/real.hpp"

namespace heatmoment {

// Dense row-major matrix of extended-precision scalars, all at one precision.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols, long bits)
      : rows_(rows), cols_(cols), bits_(bits), data_(rows * cols, Real(0L, bits)) {}

  static RealMatrix identity(std::size_t n, long bits) {
    RealMatrix m(n, n, bits);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Real(1L, bits);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  long precision() const noexcept { return bits_; }

  Real& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Real& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  long bits_ = Real::kDefaultBits;
  std::vector<Real> data_;
};

// Lower-triangular L with A = L L^T; returns false when a pivot is not
// strictly positive at this precision.
bool cholesky(const RealMatrix& a, RealMatrix& lower);

// Inverse of A from its Cholesky factor, symmetric by construction.
RealMatrix cholesky_inverse(const RealMatrix& lower);

RealMatrix multiply(const RealMatrix& a, const RealMatrix& b);
RealVector multiply(const RealMatrix& a, const RealVector& x);

}  // namespace heatmoment
