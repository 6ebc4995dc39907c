#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dcevae/errors.hpp"
#include "dcevae/matrix.hpp"
#include "dcevae/tape.hpp"

namespace dcevae::nn {

namespace detail {

inline double multi_rbf(const double* a, const double* b, std::size_t d,
                        const std::vector<double>& bandwidths, double* dk_dsq) {
  double sq = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double diff = a[c] - b[c];
    sq += diff * diff;
  }
  double k = 0.0, dk = 0.0;
  for (double h : bandwidths) {
    const double inv = 1.0 / (2.0 * h * h);
    const double e = std::exp(-sq * inv);
    k += e;
    dk += -e * inv;
  }
  if (dk_dsq) *dk_dsq = dk;
  return k;
}

// Unbiased MMD^2 U-statistic. For equal batch sizes the cross term excludes
// paired indices, so identical batches give exactly zero; for unequal sizes
// the cross term averages all pairs. Optionally fills d(MMD^2)/dX, d/dY.
inline double mmd_sq_impl(const Matrix& xs, const Matrix& ys,
                          const std::vector<double>& bandwidths, Matrix* gx, Matrix* gy) {
  if (xs.cols() != ys.cols())
    throw ShapeError("rbf_mmd: width mismatch " + xs.shape_str() + " vs " + ys.shape_str());
  if (xs.rows() < 2 || ys.rows() < 2)
    throw ShapeError("rbf_mmd: need at least 2 records per batch, got " +
                     std::to_string(xs.rows()) + " and " + std::to_string(ys.rows()));
  if (bandwidths.empty()) throw ShapeError("rbf_mmd: empty bandwidth list");
  for (double h : bandwidths)
    if (!(h > 0.0)) throw ShapeError("rbf_mmd: bandwidths must be positive");

  const std::size_t m = xs.rows(), n = ys.rows(), d = xs.cols();
  if (gx) *gx = Matrix(m, d);
  if (gy) *gy = Matrix(n, d);

  auto add_pair_grad = [&](Matrix* g, const Matrix& src, std::size_t i, std::size_t j,
                           const Matrix& other_src, Matrix* other_g, std::size_t oi,
                           double w, double dk) {
    // d k / d src_i = 2 * dk * (src_i - other_j); the mirrored term goes to other.
    if (!g && !other_g) return;
    const double c = 2.0 * w * dk;
    for (std::size_t col = 0; col < d; ++col) {
      const double diff = src(i, col) - other_src(j, col);
      if (g) (*g)(i, col) += c * diff;
      if (other_g) (*other_g)(oi, col) -= c * diff;
    }
  };

  double acc = 0.0;
  const double wxx = 1.0 / static_cast<double>(m * (m - 1));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      double dk = 0.0;
      acc += wxx * multi_rbf(xs.data() + i * d, xs.data() + j * d, d, bandwidths, &dk);
      add_pair_grad(gx, xs, i, j, xs, gx, j, wxx, dk);
    }
  const double wyy = 1.0 / static_cast<double>(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double dk = 0.0;
      acc += wyy * multi_rbf(ys.data() + i * d, ys.data() + j * d, d, bandwidths, &dk);
      add_pair_grad(gy, ys, i, j, ys, gy, j, wyy, dk);
    }
  if (m == n) {
    const double wxy = -2.0 / static_cast<double>(m * (m - 1));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        double dk = 0.0;
        acc += wxy * multi_rbf(xs.data() + i * d, ys.data() + j * d, d, bandwidths, &dk);
        add_pair_grad(gx, xs, i, j, ys, gy, j, wxy, dk);
      }
  } else {
    const double wxy = -2.0 / static_cast<double>(m * n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double dk = 0.0;
        acc += wxy * multi_rbf(xs.data() + i * d, ys.data() + j * d, d, bandwidths, &dk);
        add_pair_grad(gx, xs, i, j, ys, gy, j, wxy, dk);
      }
  }
  return acc;
}

}  // namespace detail

// Unbiased squared-MMD estimate, clamped at zero for reporting.
inline double rbf_mmd(const Matrix& xs, const Matrix& ys, const std::vector<double>& bandwidths) {
  const double v = detail::mmd_sq_impl(xs, ys, bandwidths, nullptr, nullptr);
  return v < 0.0 ? 0.0 : v;
}

// Unclamped estimate for use inside losses.
inline double rbf_mmd_raw(const Matrix& xs, const Matrix& ys,
                          const std::vector<double>& bandwidths) {
  return detail::mmd_sq_impl(xs, ys, bandwidths, nullptr, nullptr);
}

// Differentiable squared-MMD node (unclamped).
inline Val rbf_mmd_sq(Val xs, Val ys, const std::vector<double>& bandwidths) {
  detail::require_same_tape(xs, ys, "rbf_mmd_sq");
  Matrix gx, gy;
  const double v = detail::mmd_sq_impl(xs.value(), ys.value(), bandwidths, &gx, &gy);
  return xs.tape->emit(Matrix::scalar(v), {xs.id, ys.id},
                       [px = xs.id, py = ys.id, gx = std::move(gx), gy = std::move(gy)](
                           Tape& t, int self) {
                         const double g = t.adjoint(self)(0, 0);
                         t.accumulate(px, scale(gx, g));
                         t.accumulate(py, scale(gy, g));
                       });
}

}  // namespace dcevae::nn
