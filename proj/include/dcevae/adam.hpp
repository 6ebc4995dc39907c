#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dcevae/errors.hpp"
#include "dcevae/matrix.hpp"

namespace dcevae::nn {

struct AdamState {
  std::size_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState create(const std::vector<Matrix*>& params, double lr) {
    AdamState st;
    st.lr = lr;
    for (const Matrix* p : params) {
      st.m.emplace_back(p->rows(), p->cols());
      st.v.emplace_back(p->rows(), p->cols());
    }
    return st;
  }
};

// One Adam update with bias correction. Non-finite gradients abort the run;
// nothing is clipped silently.
inline void adam_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                      AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ShapeError("adam_step: parameter/gradient/state counts differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(grads[i]))
      throw ShapeError("adam_step: tensor " + std::to_string(i) + " shape " +
                       params[i]->shape_str() + " != gradient " + grads[i].shape_str());
    if (!grads[i].all_finite())
      throw NumericError("adam_step: non-finite gradient in tensor " + std::to_string(i));
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& g = grads[i];
    Matrix& m = state.m[i];
    Matrix& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g.storage()[j];
      m.storage()[j] = state.beta1 * m.storage()[j] + (1.0 - state.beta1) * gj;
      v.storage()[j] = state.beta2 * v.storage()[j] + (1.0 - state.beta2) * gj * gj;
      const double mhat = m.storage()[j] / bc1;
      const double vhat = v.storage()[j] / bc2;
      p.storage()[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace dcevae::nn
