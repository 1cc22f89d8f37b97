#include "heatmoment/real_matrix.hpp"

#include <algorithm>

#include "heatmoment/errors.hpp"

namespace heatmoment {

bool cholesky(const RealMatrix& a, RealMatrix& lower) {
  const std::size_t n = a.rows();
  const long bits = a.precision();
  lower = RealMatrix(n, n, bits);
  for (std::size_t j = 0; j < n; ++j) {
    Real diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= lower(j, k) * lower(j, k);
    if (diag.sign() <= 0) return false;
    lower(j, j) = sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      Real acc = a(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= lower(i, k) * lower(j, k);
      lower(i, j) = acc / lower(j, j);
    }
  }
  return true;
}

RealMatrix cholesky_inverse(const RealMatrix& lower) {
  const std::size_t n = lower.rows();
  const long bits = lower.precision();
  // W = L^{-1} by forward substitution, then A^{-1} = W^T W.
  RealMatrix w(n, n, bits);
  for (std::size_t j = 0; j < n; ++j) {
    w(j, j) = Real(1L, bits) / lower(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      Real acc(0L, bits);
      for (std::size_t k = j; k < i; ++k) acc += lower(i, k) * w(k, j);
      w(i, j) = -acc / lower(i, i);
    }
  }
  RealMatrix inv(n, n, bits);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      Real acc(0L, bits);
      for (std::size_t k = i; k < n; ++k) acc += w(k, i) * w(k, j);
      inv(i, j) = acc;
      inv(j, i) = acc;
    }
  }
  return inv;
}

RealMatrix multiply(const RealMatrix& a, const RealMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorKind::InvalidArgument, "matrix shape mismatch");
  const long bits = std::max(a.precision(), b.precision());
  RealMatrix out(a.rows(), b.cols(), bits);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Real acc(0L, bits);
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

RealVector multiply(const RealMatrix& a, const RealVector& x) {
  if (a.cols() != x.size()) throw Error(ErrorKind::InvalidArgument, "matrix shape mismatch");
  RealVector out;
  out.reserve(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Real acc(0L, a.precision());
    for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * x[k];
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace heatmoment
