#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "dcevae/errors.hpp"
#include "dcevae/matrix.hpp"

namespace dcevae::nn {

// Reverse-mode autodiff over batched matrix values.
//
// A Tape records every primitive executed during a forward pass as a node
// holding the forward value plus a closure that scatters the node's adjoint
// back to its parents. backward() replays the nodes in reverse, producing
// one adjoint per traced leaf. Each loss evaluation builds its own
// short-lived tape; nothing is retained across steps.
class Tape;

struct Val {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const;
};

class Tape {
 public:
  using Backprop = std::function<void(Tape&, int self)>;

  Val leaf(Matrix value) { return emit(std::move(value), {}, nullptr); }

  Val emit(Matrix value, std::vector<int> parents, Backprop backprop) {
    nodes_.push_back(Node{std::move(value), std::move(parents), std::move(backprop)});
    return Val{this, static_cast<int>(nodes_.size()) - 1};
  }

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds the root with output_adjoint and propagates to every ancestor.
  void backward(Val root, const Matrix& output_adjoint) {
    if (root.tape != this) throw ShapeError("Tape::backward: root from another tape");
    const Matrix& rv = value(root.id);
    if (!rv.same_shape(output_adjoint))
      throw ShapeError("Tape::backward: adjoint shape " + output_adjoint.shape_str() +
                       " != output shape " + rv.shape_str());
    adjoints_.assign(nodes_.size(), Matrix());
    touched_.assign(nodes_.size(), false);
    accumulate(root.id, output_adjoint);
    for (int id = root.id; id >= 0; --id) {
      Node& node = nodes_[static_cast<std::size_t>(id)];
      if (!touched_[static_cast<std::size_t>(id)] || !node.backprop) continue;
      node.backprop(*this, id);
    }
  }

  void backward_scalar(Val root) { backward(root, Matrix::scalar(1.0)); }

  // Adjoint of a node after backward(); zeros if the node does not
  // influence the seeded output.
  const Matrix& grad(Val v) {
    if (v.tape != this) throw ShapeError("Tape::grad: value from another tape");
    Matrix& g = adjoints_[static_cast<std::size_t>(v.id)];
    if (g.empty()) g = Matrix(value(v.id).rows(), value(v.id).cols());
    return g;
  }

  void accumulate(int id, const Matrix& delta) {
    Matrix& g = adjoints_[static_cast<std::size_t>(id)];
    if (g.empty()) {
      g = delta;
    } else {
      g += delta;
    }
    touched_[static_cast<std::size_t>(id)] = true;
  }

  const Matrix& adjoint(int id) const { return adjoints_[static_cast<std::size_t>(id)]; }

 private:
  struct Node {
    Matrix value;
    std::vector<int> parents;
    Backprop backprop;
  };

  std::vector<Node> nodes_;
  std::vector<Matrix> adjoints_;
  std::vector<bool> touched_;
};

inline const Matrix& Val::value() const { return tape->value(id); }

inline double Val::scalar() const {
  const Matrix& m = value();
  if (m.rows() != 1 || m.cols() != 1)
    throw ShapeError("Val::scalar: value is " + m.shape_str() + ", expected 1x1");
  return m(0, 0);
}

namespace detail {
inline void require_same_tape(Val a, Val b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape)
    throw ShapeError(std::string(op) + ": operands from different tapes");
}
}  // namespace detail

// ---- elementwise arithmetic ----

inline Val operator+(Val a, Val b) {
  detail::require_same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  return a.tape->emit(a.value() + b.value(), {a.id, b.id}, [pa = a.id, pb = b.id](Tape& t, int self) {
    t.accumulate(pa, t.adjoint(self));
    t.accumulate(pb, t.adjoint(self));
  });
}

inline Val operator-(Val a, Val b) {
  detail::require_same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  return a.tape->emit(a.value() - b.value(), {a.id, b.id}, [pa = a.id, pb = b.id](Tape& t, int self) {
    t.accumulate(pa, t.adjoint(self));
    t.accumulate(pb, scale(t.adjoint(self), -1.0));
  });
}

inline Val operator*(Val a, Val b) {
  detail::require_same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  return a.tape->emit(hadamard(a.value(), b.value()), {a.id, b.id},
                      [pa = a.id, pb = b.id](Tape& t, int self) {
                        t.accumulate(pa, hadamard(t.adjoint(self), t.value(pb)));
                        t.accumulate(pb, hadamard(t.adjoint(self), t.value(pa)));
                      });
}

inline Val operator*(double c, Val a) {
  return a.tape->emit(scale(a.value(), c), {a.id}, [pa = a.id, c](Tape& t, int self) {
    t.accumulate(pa, scale(t.adjoint(self), c));
  });
}
inline Val operator*(Val a, double c) { return c * a; }
inline Val operator-(Val a) { return -1.0 * a; }

inline Val operator+(Val a, double c) {
  Matrix out = a.value();
  for (double& v : out.storage()) v += c;
  return a.tape->emit(std::move(out), {a.id}, [pa = a.id](Tape& t, int self) {
    t.accumulate(pa, t.adjoint(self));
  });
}
inline Val operator+(double c, Val a) { return a + c; }
inline Val operator-(Val a, double c) { return a + (-c); }
inline Val operator-(double c, Val a) { return (-1.0 * a) + c; }

// ---- elementwise functions ----

namespace detail {
template <typename Fwd, typename Dfx>
Val unary_op(Val a, Fwd fwd, Dfx dfdx_from_in_out) {
  Matrix out = a.value();
  for (double& v : out.storage()) v = fwd(v);
  Matrix saved_out = out;
  return a.tape->emit(std::move(out), {a.id},
                      [pa = a.id, d = dfdx_from_in_out, so = std::move(saved_out)](Tape& t, int self) {
                        const Matrix& g = t.adjoint(self);
                        const Matrix& in = t.value(pa);
                        Matrix gin(in.rows(), in.cols());
                        for (std::size_t i = 0; i < gin.size(); ++i)
                          gin.storage()[i] = g.storage()[i] * d(in.storage()[i], so.storage()[i]);
                        t.accumulate(pa, std::move(gin));
                      });
}
}  // namespace detail

inline Val tanh(Val a) {
  return detail::unary_op(a, [](double x) { return std::tanh(x); },
                          [](double, double y) { return 1.0 - y * y; });
}

inline Val sigmoid(Val a) {
  return detail::unary_op(
      a,
      [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
      [](double, double y) { return y * (1.0 - y); });
}

inline Val exp(Val a) {
  return detail::unary_op(a, [](double x) { return std::exp(x); },
                          [](double, double y) { return y; });
}

inline Val log(Val a) {
  return detail::unary_op(a, [](double x) { return std::log(x); },
                          [](double x, double) { return 1.0 / x; });
}

inline Val sqrt(Val a) {
  return detail::unary_op(a, [](double x) { return std::sqrt(x); },
                          [](double, double y) { return 0.5 / y; });
}

inline Val square(Val a) {
  return detail::unary_op(a, [](double x) { return x * x; },
                          [](double x, double) { return 2.0 * x; });
}

// log(1 + e^x), overflow-safe.
inline Val softplus(Val a) {
  return detail::unary_op(
      a, [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); },
      [](double x, double) {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      });
}

// max(x, c) with zero gradient below the clamp.
inline Val clamp_min(Val a, double c) {
  return detail::unary_op(a, [c](double x) { return x < c ? c : x; },
                          [c](double x, double) { return x < c ? 0.0 : 1.0; });
}

// ---- matrix products ----

inline Val matmul(Val a, Val b) {
  detail::require_same_tape(a, b, "matmul");
  return a.tape->emit(matmul(a.value(), b.value()), {a.id, b.id},
                      [pa = a.id, pb = b.id](Tape& t, int self) {
                        const Matrix& g = t.adjoint(self);
                        t.accumulate(pa, matmul_bt(g, t.value(pb)));
                        t.accumulate(pb, matmul_at(t.value(pa), g));
                      });
}

// x (B x I), w (O x I), bias (1 x O) -> x w^T + 1 bias, the natural MLP layer.
inline Val linear(Val x, Val w, Val bias) {
  detail::require_same_tape(x, w, "linear");
  detail::require_same_tape(x, bias, "linear");
  if (x.cols() != w.cols())
    throw ShapeError("linear: input width " + std::to_string(x.cols()) +
                     " != weight fan-in " + std::to_string(w.cols()));
  if (bias.value().rows() != 1 || bias.cols() != w.rows())
    throw ShapeError("linear: bias shape " + bias.value().shape_str() + " != 1x" +
                     std::to_string(w.rows()));
  Matrix out = matmul_bt(x.value(), w.value());
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bias.value()(0, c);
  return x.tape->emit(std::move(out), {x.id, w.id, bias.id},
                      [px = x.id, pw = w.id, pb = bias.id](Tape& t, int self) {
                        const Matrix& g = t.adjoint(self);
                        t.accumulate(px, matmul(g, t.value(pw)));
                        t.accumulate(pw, matmul_at(g, t.value(px)));
                        t.accumulate(pb, col_sums(g));
                      });
}

// ---- reductions ----

inline Val sum(Val a) {
  double acc = 0.0;
  for (double v : a.value().storage()) acc += v;
  return a.tape->emit(Matrix::scalar(acc), {a.id}, [pa = a.id](Tape& t, int self) {
    const double g = t.adjoint(self)(0, 0);
    const Matrix& in = t.value(pa);
    t.accumulate(pa, Matrix(in.rows(), in.cols(), g));
  });
}

inline Val mean(Val a) {
  if (a.value().empty()) throw ShapeError("mean: empty operand");
  return (1.0 / static_cast<double>(a.value().size())) * sum(a);
}

// Row-wise sum -> (R x 1).
inline Val row_sum(Val a) {
  const Matrix& m = a.value();
  Matrix out(m.rows(), 1);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c);
    out(r, 0) = acc;
  }
  return a.tape->emit(std::move(out), {a.id}, [pa = a.id](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    const Matrix& in = t.value(pa);
    Matrix gin(in.rows(), in.cols());
    for (std::size_t r = 0; r < in.rows(); ++r)
      for (std::size_t c = 0; c < in.cols(); ++c) gin(r, c) = g(r, 0);
    t.accumulate(pa, std::move(gin));
  });
}

// Row-wise Euclidean norm -> (R x 1). Zero rows get zero gradient.
inline Val row_l2norm(Val a) {
  const Matrix& m = a.value();
  Matrix out(m.rows(), 1);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * m(r, c);
    out(r, 0) = std::sqrt(acc);
  }
  Matrix saved = out;
  return a.tape->emit(std::move(out), {a.id}, [pa = a.id, norms = std::move(saved)](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    const Matrix& in = t.value(pa);
    Matrix gin(in.rows(), in.cols());
    for (std::size_t r = 0; r < in.rows(); ++r) {
      const double n = norms(r, 0);
      if (n == 0.0) continue;
      for (std::size_t c = 0; c < in.cols(); ++c) gin(r, c) = g(r, 0) * in(r, c) / n;
    }
    t.accumulate(pa, std::move(gin));
  });
}

// ---- structure ops ----

inline Val concat_cols(const std::vector<Val>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  Tape* tape = parts.front().tape;
  std::size_t rows = parts.front().rows(), total = 0;
  std::vector<int> parents;
  for (const Val& p : parts) {
    detail::require_same_tape(parts.front(), p, "concat_cols");
    if (p.rows() != rows)
      throw ShapeError("concat_cols: row mismatch " + p.value().shape_str());
    total += p.cols();
    parents.push_back(p.id);
  }
  Matrix out(rows, total);
  std::size_t off = 0;
  for (const Val& p : parts) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < p.cols(); ++c) out(r, off + c) = p.value()(r, c);
    off += p.cols();
  }
  return tape->emit(std::move(out), parents, [ps = parents](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    std::size_t off = 0;
    for (int pid : ps) {
      const Matrix& in = t.value(pid);
      Matrix gin(in.rows(), in.cols());
      for (std::size_t r = 0; r < in.rows(); ++r)
        for (std::size_t c = 0; c < in.cols(); ++c) gin(r, c) = g(r, off + c);
      t.accumulate(pid, std::move(gin));
      off += in.cols();
    }
  });
}

inline Val concat_cols(Val a, Val b) { return concat_cols(std::vector<Val>{a, b}); }

inline Val slice_cols(Val a, std::size_t begin, std::size_t width) {
  const Matrix& m = a.value();
  if (begin + width > m.cols())
    throw ShapeError("slice_cols: [" + std::to_string(begin) + "," +
                     std::to_string(begin + width) + ") out of range for " + m.shape_str());
  Matrix out(m.rows(), width);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < width; ++c) out(r, c) = m(r, begin + c);
  return a.tape->emit(std::move(out), {a.id}, [pa = a.id, begin, width](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    const Matrix& in = t.value(pa);
    Matrix gin(in.rows(), in.cols());
    for (std::size_t r = 0; r < in.rows(); ++r)
      for (std::size_t c = 0; c < width; ++c) gin(r, begin + c) = g(r, c);
    t.accumulate(pa, std::move(gin));
  });
}

// Rows of a reordered/selected by idx; backward scatter-adds.
inline Val gather_rows(Val a, const std::vector<std::size_t>& idx) {
  const Matrix& m = a.value();
  Matrix out(idx.size(), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= m.rows())
      throw ShapeError("gather_rows: index " + std::to_string(idx[r]) +
                       " out of range for " + m.shape_str());
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(idx[r], c);
  }
  return a.tape->emit(std::move(out), {a.id}, [pa = a.id, idx](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    const Matrix& in = t.value(pa);
    Matrix gin(in.rows(), in.cols());
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < in.cols(); ++c) gin(idx[r], c) += g(r, c);
    t.accumulate(pa, std::move(gin));
  });
}

}  // namespace dcevae::nn
