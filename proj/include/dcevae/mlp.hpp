#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dcevae/errors.hpp"
#include "dcevae/matrix.hpp"
#include "dcevae/rng.hpp"
#include "dcevae/tape.hpp"

namespace dcevae::nn {

enum class OutputActivation { linear, sigmoid };

inline std::string to_string(OutputActivation a) {
  return a == OutputActivation::linear ? "linear" : "sigmoid";
}
inline OutputActivation output_activation_from_string(const std::string& s) {
  if (s == "linear") return OutputActivation::linear;
  if (s == "sigmoid") return OutputActivation::sigmoid;
  throw IoError("unknown output activation '" + s + "'");
}

// Fully connected net, tanh hidden layers, linear or sigmoid output head.
// weights[i] has shape layer_dims[i+1] x layer_dims[i].
struct Mlp {
  std::vector<std::size_t> layer_dims;
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;
  OutputActivation output_activation = OutputActivation::linear;

  std::size_t in_dim() const { return layer_dims.front(); }
  std::size_t out_dim() const { return layer_dims.back(); }
  std::size_t layer_count() const { return weights.size(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const Matrix& w : weights) n += w.size();
    for (const Matrix& b : biases) n += b.size();
    return n;
  }

  // Glorot-uniform init: +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static Mlp create(std::vector<std::size_t> dims, OutputActivation act, Rng& rng) {
    if (dims.size() < 2) throw ShapeError("Mlp::create: need at least [in, out] dims");
    for (std::size_t d : dims)
      if (d == 0) throw ShapeError("Mlp::create: zero-width layer");
    Mlp net;
    net.layer_dims = std::move(dims);
    net.output_activation = act;
    for (std::size_t i = 0; i + 1 < net.layer_dims.size(); ++i) {
      const std::size_t fan_in = net.layer_dims[i], fan_out = net.layer_dims[i + 1];
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      Matrix w(fan_out, fan_in);
      for (double& v : w.storage()) v = rng.uniform_range(limit);
      net.weights.push_back(std::move(w));
      net.biases.push_back(Matrix(1, fan_out));
    }
    return net;
  }
};

// Tape handles for one net's parameters, in update order (W0,b0,W1,b1,...).
struct TracedMlp {
  const Mlp* net = nullptr;
  std::vector<Val> weights;
  std::vector<Val> biases;
};

inline TracedMlp trace(Tape& tape, const Mlp& net) {
  TracedMlp traced;
  traced.net = &net;
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    traced.weights.push_back(tape.leaf(net.weights[i]));
    traced.biases.push_back(tape.leaf(net.biases[i]));
  }
  return traced;
}

struct MlpOut {
  Val out;  // after the output activation
  Val pre;  // pre-activation logits of the last layer
};

inline MlpOut apply(Tape& tape, const TracedMlp& traced, Val input) {
  const Mlp& net = *traced.net;
  if (input.cols() != net.in_dim())
    throw ShapeError("mlp apply: input width " + std::to_string(input.cols()) +
                     " != expected " + std::to_string(net.in_dim()));
  Val h = input;
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    h = linear(h, traced.weights[i], traced.biases[i]);
    if (i + 1 < net.layer_count()) h = tanh(h);
  }
  Val out = net.output_activation == OutputActivation::sigmoid ? sigmoid(h) : h;
  return MlpOut{out, h};
}

// Untraced forward pass; runs through a scratch tape so evaluation and
// training share one arithmetic path.
inline Matrix forward(const Mlp& net, const Matrix& input) {
  Tape tape;
  TracedMlp traced = trace(tape, net);
  return apply(tape, traced, tape.leaf(input)).out.value();
}

// Gradients for one net extracted from a tape after backward(), in the
// same order as parameters(): W0, b0, W1, b1, ...
inline std::vector<Matrix> gradients(Tape& tape, const TracedMlp& traced) {
  std::vector<Matrix> grads;
  for (std::size_t i = 0; i < traced.weights.size(); ++i) {
    grads.push_back(tape.grad(traced.weights[i]));
    grads.push_back(tape.grad(traced.biases[i]));
  }
  return grads;
}

inline std::vector<Matrix*> parameters(Mlp& net) {
  std::vector<Matrix*> out;
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    out.push_back(&net.weights[i]);
    out.push_back(&net.biases[i]);
  }
  return out;
}

}  // namespace dcevae::nn
