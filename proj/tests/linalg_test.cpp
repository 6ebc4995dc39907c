#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dcevae/linalg.hpp"
#include "dcevae/rng.hpp"

using namespace dcevae;
using Catch::Approx;

namespace {
Matrix random_spd(Rng& rng, std::size_t n) {
  Matrix r = rng.normal_matrix(n, n);
  Matrix s = matmul_at(r, r);
  for (std::size_t i = 0; i < n; ++i) s(i, i) += 0.5;
  return s;
}
}  // namespace

TEST_CASE("inverse recovers identity") {
  Rng rng(42);
  for (std::size_t n : {2, 5, 8}) {
    const Matrix a = random_spd(rng, n);
    const Matrix inv = linalg::inverse(a);
    const Matrix prod = matmul(a, inv);
    CHECK(frobenius_norm(prod - Matrix::identity(n)) < 1e-9);
  }
}

TEST_CASE("inverse rejects singular input") {
  Matrix a(2, 2, {1.0, 2.0, 2.0, 4.0});
  CHECK_THROWS_AS(linalg::inverse(a), NumericError);
}

TEST_CASE("cholesky squares back to the input") {
  Rng rng(7);
  const Matrix a = random_spd(rng, 6);
  const Matrix l = linalg::cholesky(a);
  CHECK(frobenius_norm(matmul_bt(l, l) - a) < 1e-9);
  CHECK(linalg::is_spd(a));
}

TEST_CASE("cholesky rejects indefinite matrices") {
  Matrix a(2, 2, {1.0, 2.0, 2.0, 1.0});
  CHECK_THROWS_AS(linalg::cholesky(a), NumericError);
  CHECK_FALSE(linalg::is_spd(a));
}

TEST_CASE("log det agrees with direct computation on a diagonal matrix") {
  Matrix a(3, 3);
  a(0, 0) = 2.0;
  a(1, 1) = 0.5;
  a(2, 2) = 3.0;
  CHECK(linalg::log_det_spd(a) == Approx(std::log(2.0 * 0.5 * 3.0)));
}

TEST_CASE("jacobi eigenvalues match known spectra") {
  Matrix d(3, 3);
  d(0, 0) = -1.0;
  d(1, 1) = 4.0;
  d(2, 2) = 2.0;
  auto eig = linalg::symmetric_eigenvalues(d);
  CHECK(eig[0] == Approx(-1.0));
  CHECK(eig[1] == Approx(2.0));
  CHECK(eig[2] == Approx(4.0));

  // 2x2 with analytic eigenvalues 1 and 3.
  Matrix a(2, 2, {2.0, 1.0, 1.0, 2.0});
  auto e2 = linalg::symmetric_eigenvalues(a);
  CHECK(e2[0] == Approx(1.0));
  CHECK(e2[1] == Approx(3.0));
}

TEST_CASE("eigenvalue sum and product match trace and determinant") {
  Rng rng(19);
  const Matrix a = random_spd(rng, 5);
  auto eig = linalg::symmetric_eigenvalues(a);
  double trace = 0.0;
  for (std::size_t i = 0; i < 5; ++i) trace += a(i, i);
  double sum = 0.0, logprod = 0.0;
  for (double e : eig) {
    sum += e;
    logprod += std::log(e);
  }
  CHECK(sum == Approx(trace).epsilon(1e-9));
  CHECK(logprod == Approx(linalg::log_det_spd(a)).epsilon(1e-9));
}
