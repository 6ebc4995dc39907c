#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dcevae/adam.hpp"
#include "dcevae/matrix.hpp"
#include "dcevae/mlp.hpp"
#include "dcevae/mmd.hpp"
#include "dcevae/rng.hpp"
#include "dcevae/tape.hpp"
#include "support/gradcheck.hpp"

using namespace dcevae;
using Catch::Approx;

TEST_CASE("matrix ops reject mismatched shapes before computing") {
  Matrix a(2, 3), b(3, 2);
  CHECK_THROWS_AS(a + b, ShapeError);
  CHECK_THROWS_AS(hadamard(a, b), ShapeError);
  CHECK_THROWS_AS(matmul(a, Matrix(2, 2)), ShapeError);
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1.0, 2.0, 3.0}), ShapeError);
}

TEST_CASE("mlp identity layer reproduces its input") {
  Rng rng(1);
  nn::Mlp net = nn::Mlp::create({2, 2}, nn::OutputActivation::linear, rng);
  net.weights[0] = Matrix::identity(2);
  net.biases[0] = Matrix(1, 2);
  Matrix out = nn::forward(net, Matrix(1, 2, {1.0, 2.0}));
  CHECK(out(0, 0) == 1.0);
  CHECK(out(0, 1) == 2.0);
}

TEST_CASE("mlp with zero weights outputs its bias for every input") {
  Rng rng(2);
  nn::Mlp net = nn::Mlp::create({3, 4, 2}, nn::OutputActivation::linear, rng);
  for (Matrix& w : net.weights)
    for (double& v : w.storage()) v = 0.0;
  net.biases[1] = Matrix(1, 2, {0.7, -1.3});
  for (int trial = 0; trial < 3; ++trial) {
    Matrix out = nn::forward(net, rng.normal_matrix(5, 3));
    for (std::size_t r = 0; r < 5; ++r) {
      CHECK(out(r, 0) == Approx(0.7));
      CHECK(out(r, 1) == Approx(-1.3));
    }
  }
}

TEST_CASE("mlp forward matches a hand-rolled straight-line pass") {
  Rng rng(3);
  nn::Mlp net = nn::Mlp::create({2, 3, 1}, nn::OutputActivation::sigmoid, rng);
  const Matrix input(1, 2, {0.3, -0.7});
  const Matrix out = nn::forward(net, input);

  // Independent recomputation with scalar arithmetic only.
  double hidden[3];
  for (int j = 0; j < 3; ++j) {
    double acc = net.biases[0](0, j);
    acc += net.weights[0](j, 0) * 0.3;
    acc += net.weights[0](j, 1) * -0.7;
    hidden[j] = std::tanh(acc);
  }
  double z = net.biases[1](0, 0);
  for (int j = 0; j < 3; ++j) z += net.weights[1](0, j) * hidden[j];
  const double expected = 1.0 / (1.0 + std::exp(-z));

  CHECK(out(0, 0) == Approx(expected).epsilon(1e-12));
  CHECK(out(0, 0) > 0.0);
  CHECK(out(0, 0) < 1.0);
}

TEST_CASE("mlp rejects wrong input width with a shape diagnostic") {
  Rng rng(4);
  nn::Mlp net = nn::Mlp::create({3, 2}, nn::OutputActivation::linear, rng);
  CHECK_THROWS_AS(nn::forward(net, Matrix(1, 4)), ShapeError);
}

TEST_CASE("backward: gradient of half squared norm is the input itself") {
  nn::Tape tape;
  nn::Val x = tape.leaf(Matrix(1, 2, {3.0, 4.0}));
  nn::Val w = tape.leaf(Matrix::identity(2));
  nn::Val b = tape.leaf(Matrix(1, 2));
  nn::Val loss = 0.5 * nn::sum(nn::square(nn::linear(x, w, b)));
  tape.backward_scalar(loss);
  const Matrix& gx = tape.grad(x);
  CHECK(gx(0, 0) == Approx(3.0));
  CHECK(gx(0, 1) == Approx(4.0));
}

TEST_CASE("backward: constant loss gives zero gradient") {
  nn::Tape tape;
  nn::Val x = tape.leaf(Matrix(2, 2, {1.0, 2.0, 3.0, 4.0}));
  nn::Val c = tape.leaf(Matrix::scalar(5.0));
  nn::Val loss = nn::sum(c);  // does not depend on x
  tape.backward_scalar(loss);
  CHECK(max_abs(tape.grad(x)) == 0.0);
  CHECK(tape.grad(c)(0, 0) == Approx(1.0));
}

TEST_CASE("backward rejects adjoint shape mismatch") {
  nn::Tape tape;
  nn::Val x = tape.leaf(Matrix(2, 2));
  CHECK_THROWS_AS(tape.backward(x, Matrix(1, 1)), ShapeError);
}

TEST_CASE("every tape primitive matches central finite differences") {
  Rng rng(11);
  auto rand_m = [&](std::size_t r, std::size_t c) { return rng.normal_matrix(r, c); };

  SECTION("elementwise and reductions") {
    auto build = [](nn::Tape& t, const std::vector<nn::Val>& in) {
      nn::Val a = in[0], b = in[1];
      nn::Val u = nn::tanh(a) * nn::sigmoid(b) + nn::exp(0.3 * a) - nn::softplus(b);
      nn::Val v = nn::sqrt(nn::square(u) + 1.0) + nn::log(nn::square(a) + 2.0);
      return nn::mean(v) + nn::sum(nn::clamp_min(b, 0.25)) + nn::mean(nn::row_l2norm(a + b));
    };
    auto res = testsupport::gradient_check(build, {rand_m(3, 4), rand_m(3, 4)});
    INFO("worst " << res.analytic << " vs " << res.numeric);
    CHECK(res.max_rel_err < 1e-4);
  }

  SECTION("linear, matmul, concat, slice, gather") {
    std::vector<std::size_t> perm{2, 0, 1};
    auto build = [perm](nn::Tape& t, const std::vector<nn::Val>& in) {
      nn::Val x = in[0], w = in[1], b = in[2], m = in[3];
      nn::Val h = nn::tanh(nn::linear(x, w, b));
      nn::Val joined = nn::concat_cols({h, nn::gather_rows(x, perm)});
      nn::Val part = nn::slice_cols(joined, 1, 3);
      return nn::sum(nn::square(nn::matmul(part, m))) + nn::mean(nn::row_sum(joined));
    };
    auto res = testsupport::gradient_check(
        build, {rand_m(3, 4), rand_m(2, 4), rand_m(1, 2), rand_m(3, 2)});
    CHECK(res.max_rel_err < 1e-4);
  }

  SECTION("rbf mmd node, equal and unequal batch sizes") {
    auto build = [](nn::Tape& t, const std::vector<nn::Val>& in) {
      return nn::rbf_mmd_sq(in[0], in[1], {0.7, 1.5});
    };
    auto res_eq = testsupport::gradient_check(build, {rand_m(4, 3), rand_m(4, 3)});
    CHECK(res_eq.max_rel_err < 1e-4);
    auto res_ne = testsupport::gradient_check(build, {rand_m(4, 3), rand_m(6, 3)});
    CHECK(res_ne.max_rel_err < 1e-4);
  }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged and bumps step") {
  Matrix p(2, 2, {1.0, -2.0, 3.0, 0.5});
  const Matrix before = p;
  nn::AdamState st = nn::AdamState::create({&p}, 1e-3);
  nn::adam_step({&p}, {Matrix(2, 2)}, st);
  CHECK(st.step == 1);
  CHECK(max_abs(p - before) == 0.0);
}

TEST_CASE("adam: bias-corrected first step moves by about lr * sign(g)") {
  Matrix p(1, 3, {0.0, 0.0, 0.0});
  nn::AdamState st = nn::AdamState::create({&p}, 0.01);
  const Matrix g(1, 3, {0.5, -2.0, 1e-3});
  nn::adam_step({&p}, {g}, st);
  for (std::size_t j = 0; j < 3; ++j) {
    const double gj = g(0, j);
    const double expected = -st.lr * gj / (std::abs(gj) + st.eps);
    CHECK(p(0, j) == Approx(expected).margin(st.eps));
  }
}

TEST_CASE("adam: 100 steps on (w-3)^2 approach the minimum and match a scalar recurrence") {
  Matrix w(1, 1, {0.0});
  nn::AdamState st = nn::AdamState::create({&w}, 0.1);

  // Independent plain-double recurrence of the same update rule.
  double wr = 0.0, m = 0.0, v = 0.0;
  for (int step = 1; step <= 100; ++step) {
    nn::adam_step({&w}, {Matrix(1, 1, {2.0 * (w(0, 0) - 3.0)})}, st);

    const double g = 2.0 * (wr - 3.0);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mhat = m / (1.0 - std::pow(0.9, step));
    const double vhat = v / (1.0 - std::pow(0.999, step));
    wr -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
  }
  CHECK(w(0, 0) == Approx(wr).epsilon(1e-12));
  CHECK(std::abs(w(0, 0) - 3.0) < 0.5);
}

TEST_CASE("adam aborts on non-finite gradients") {
  Matrix p(1, 1, {1.0});
  nn::AdamState st = nn::AdamState::create({&p}, 1e-3);
  Matrix bad(1, 1);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(nn::adam_step({&p}, {bad}, st), NumericError);
}

TEST_CASE("gaussian draws are deterministic under a fixed seed") {
  Rng a(7), b(7);
  const std::vector<double> xs = a.normal_vec(1000);
  const std::vector<double> ys = b.normal_vec(1000);
  CHECK(xs == ys);
}

TEST_CASE("gaussian sample moments over 1e5 draws") {
  Rng rng(123);
  const std::size_t n = 100000;
  const std::vector<double> xs = rng.normal_vec(n);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n - 1);
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("gaussian_sample rejects n = 0") {
  Rng rng(1);
  CHECK_THROWS_AS(rng.normal_vec(0), ShapeError);
}

TEST_CASE("rng permutation covers all indices") {
  Rng rng(5);
  auto p = rng.permutation(17);
  std::vector<bool> seen(17, false);
  for (std::size_t i : p) seen[i] = true;
  for (bool s : seen) CHECK(s);
}

TEST_CASE("rbf_mmd of a batch against itself is zero") {
  Rng rng(9);
  const Matrix xs = rng.normal_matrix(16, 3);
  CHECK(nn::rbf_mmd(xs, xs, {1.0}) == Approx(0.0).margin(1e-9));
}

TEST_CASE("rbf_mmd of two point masses matches the closed form") {
  // n copies of the origin vs n copies of a point at distance d.
  const double d = 1.7;
  Matrix xs(6, 2), ys(6, 2);
  for (std::size_t r = 0; r < 6; ++r) {
    ys(r, 0) = d;
    ys(r, 1) = 0.0;
  }
  const double expected = 2.0 * (1.0 - std::exp(-d * d / 2.0));
  CHECK(nn::rbf_mmd(xs, ys, {1.0}) == Approx(expected).epsilon(1e-12));
}

TEST_CASE("rbf_mmd between same-distribution batches is small") {
  Rng rng(31);
  const Matrix xs = rng.normal_matrix(512, 2);
  const Matrix ys = rng.normal_matrix(512, 2);
  CHECK(std::abs(nn::rbf_mmd_raw(xs, ys, {1.0})) < 0.05);
}

TEST_CASE("rbf_mmd rejects degenerate batches") {
  Matrix one(1, 2), ok(4, 2), wrong(4, 3);
  CHECK_THROWS_AS(nn::rbf_mmd(one, ok, {1.0}), ShapeError);
  CHECK_THROWS_AS(nn::rbf_mmd(ok, wrong, {1.0}), ShapeError);
  CHECK_THROWS_AS(nn::rbf_mmd(ok, ok, {}), ShapeError);
}
