#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dcevae/errors.hpp"
#include "dcevae/matrix.hpp"

namespace dcevae::linalg {

// Gauss-Jordan inverse with partial pivoting. Matrices here are small
// (latent dimension squared), so numerical refinement is unnecessary.
inline Matrix inverse(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("inverse: matrix is " + a.shape_str());
  const std::size_t n = a.rows();
  Matrix work = a;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(work(r, col)) > std::abs(work(pivot, col))) pivot = r;
    const double pv = work(pivot, col);
    if (std::abs(pv) < 1e-300)
      throw NumericError("inverse: singular matrix (pivot " + std::to_string(pv) +
                         " at column " + std::to_string(col) + ")");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(work(pivot, c), work(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }
    const double inv_pv = 1.0 / work(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      work(col, c) *= inv_pv;
      inv(col, c) *= inv_pv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = work(r, col);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        work(r, c) -= f * work(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

// Cholesky factor L (lower) of an SPD matrix; throws NumericError otherwise.
inline Matrix cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("cholesky: matrix is " + a.shape_str());
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = a(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      if (i == j) {
        if (acc <= 0.0)
          throw NumericError("cholesky: matrix not positive definite (d_" +
                             std::to_string(i) + " = " + std::to_string(acc) + ")");
        l(i, i) = std::sqrt(acc);
      } else {
        l(i, j) = acc / l(j, j);
      }
    }
  }
  return l;
}

inline bool is_spd(const Matrix& a) {
  try {
    cholesky(a);
    return true;
  } catch (const NumericError&) {
    return false;
  }
}

inline double log_det_spd(const Matrix& a) {
  const Matrix l = cholesky(a);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline std::vector<double> symmetric_eigenvalues(const Matrix& a, double tol = 1e-12,
                                                 std::size_t max_sweeps = 100) {
  if (a.rows() != a.cols()) throw ShapeError("symmetric_eigenvalues: matrix is " + a.shape_str());
  const std::size_t n = a.rows();
  Matrix w = a;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += w(i, j) * w(i, j);
    if (std::sqrt(off) < tol) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(w(p, q)) < 1e-300) continue;
        const double theta = (w(q, q) - w(p, p)) / (2.0 * w(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double wkp = w(k, p), wkq = w(k, q);
          w(k, p) = c * wkp - s * wkq;
          w(k, q) = s * wkp + c * wkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double wpk = w(p, k), wqk = w(q, k);
          w(p, k) = c * wpk - s * wqk;
          w(q, k) = s * wpk + c * wqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = w(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

// Rough 2-norm condition estimate from the eigenvalue spread (symmetric input).
inline double condition_estimate_symmetric(const Matrix& a) {
  const std::vector<double> eig = symmetric_eigenvalues(a);
  double lo = 1e300, hi = 0.0;
  for (double e : eig) {
    lo = std::min(lo, std::abs(e));
    hi = std::max(hi, std::abs(e));
  }
  if (lo == 0.0) return 1e300;
  return hi / lo;
}

inline Matrix symmetrize(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("symmetrize: matrix is " + a.shape_str());
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = 0.5 * (a(i, j) + a(j, i));
  return out;
}

}  // namespace dcevae::linalg
