#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "dcevae/errors.hpp"
#include "dcevae/matrix.hpp"

namespace dcevae {

// Deterministic random source. mt19937_64 is fully specified by the
// standard and the derived draws below are hand-rolled, so a fixed seed
// yields an identical sequence on every platform/compiler. Library
// distributions (std::normal_distribution etc.) are implementation-defined
// and must not be used anywhere in the artifact.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform on [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so log() is safe.
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::vector<double> normal_vec(std::size_t n) {
    if (n == 0) throw ShapeError("Rng::normal_vec: n must be >= 1");
    std::vector<double> out(n);
    for (double& v : out) v = normal();
    return out;
  }

  Matrix normal_matrix(std::size_t rows, std::size_t cols) {
    Matrix out(rows, cols);
    for (double& v : out.storage()) v = normal();
    return out;
  }

  // Uniform on [-limit, limit).
  double uniform_range(double limit) { return (2.0 * uniform01() - 1.0) * limit; }

  // Unbiased integer on [0, bound) by rejection.
  std::uint64_t uniform_int(std::uint64_t bound) {
    if (bound == 0) throw ShapeError("Rng::uniform_int: bound must be >= 1");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Fisher-Yates shuffle of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(idx[i - 1], idx[j]);
    }
    return idx;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dcevae
