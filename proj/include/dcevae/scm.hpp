#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcevae/dataset.hpp"
#include "dcevae/errors.hpp"
#include "dcevae/matrix.hpp"
#include "dcevae/rng.hpp"

namespace dcevae::data {

inline double sigmoid_scalar(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Linear-logistic structural causal model:
//   u_r ~ N(0, I_k)                      u_d ~ N(0, I_m)
//   a   ~ Bernoulli(sigmoid(c_a.u_r + c_0))
//   x_r = B_r u_r + eps_r                (a-correlated through u_r, not caused)
//   x_d = B_d u_d + w_a a + eps_d        (caused by a)
//   y   ~ Bernoulli(sigmoid(v_a a + v_d.u_d + v_r.u_r))
// Counterfactuals negate a while reusing every exogenous draw, so ground
// truth effects have closed forms per record.
struct ScmSpec {
  std::uint64_t seed = 1;
  std::size_t u_r_dim = 3;
  std::size_t u_d_dim = 2;
  std::vector<double> c_a{1.2, 0.9, 0.0};
  double c_0 = 0.0;
  Matrix b_r{4, 3, {1.0, 0.3, 0.0, -0.6, 0.8, 0.2, 0.4, -0.5, 0.9, 0.2, 0.6, -0.7}};
  double noise_r = 0.4;
  Matrix b_d{3, 2, {0.9, -0.4, 0.5, 0.8, -0.7, 0.3}};
  std::vector<double> w_a{1.2, -0.9, 0.7};
  double noise_d = 0.4;
  double v_a = 1.1;
  std::vector<double> v_d{0.8, -0.6};
  std::vector<double> v_r{0.5, -0.4, 0.3};

  std::size_t x_r_dim() const { return b_r.rows(); }
  std::size_t x_d_dim() const { return b_d.rows(); }

  void validate() const {
    if (u_r_dim == 0 || u_d_dim == 0) throw ShapeError("scm: latent dims must be >= 1");
    if (c_a.size() != u_r_dim) throw ShapeError("scm: |c_a| != u_r dim");
    if (b_r.cols() != u_r_dim) throw ShapeError("scm: B_r cols != u_r dim");
    if (b_d.cols() != u_d_dim) throw ShapeError("scm: B_d cols != u_d dim");
    if (w_a.size() != x_d_dim()) throw ShapeError("scm: |w_a| != x_d dim");
    if (v_d.size() != u_d_dim) throw ShapeError("scm: |v_d| != u_d dim");
    if (v_r.size() != u_r_dim) throw ShapeError("scm: |v_r| != u_r dim");
    if (!(noise_r > 0.0) || !(noise_d > 0.0)) throw ShapeError("scm: noise std must be > 0");
    if (x_r_dim() < 2) throw ShapeError("scm: need >= 2 x_r columns for CE conditioning");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["u_r_dim"] = u_r_dim;
    j["u_d_dim"] = u_d_dim;
    j["c_a"] = c_a;
    j["c_0"] = c_0;
    j["b_r"] = matrix_rows(b_r);
    j["noise_r"] = noise_r;
    j["b_d"] = matrix_rows(b_d);
    j["noise_d"] = noise_d;
    j["w_a"] = w_a;
    j["v_a"] = v_a;
    j["v_d"] = v_d;
    j["v_r"] = v_r;
    return j;
  }

  static ScmSpec from_json(const nlohmann::json& j) {
    ScmSpec s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.u_r_dim = j.at("u_r_dim").get<std::size_t>();
    s.u_d_dim = j.at("u_d_dim").get<std::size_t>();
    s.c_a = j.at("c_a").get<std::vector<double>>();
    s.c_0 = j.at("c_0").get<double>();
    s.b_r = matrix_from_rows(j.at("b_r"));
    s.noise_r = j.at("noise_r").get<double>();
    s.b_d = matrix_from_rows(j.at("b_d"));
    s.noise_d = j.at("noise_d").get<double>();
    s.w_a = j.at("w_a").get<std::vector<double>>();
    s.v_a = j.at("v_a").get<double>();
    s.v_d = j.at("v_d").get<std::vector<double>>();
    s.v_r = j.at("v_r").get<std::vector<double>>();
    s.validate();
    return s;
  }

  static nlohmann::json matrix_rows(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(row);
    }
    return rows;
  }
  static Matrix matrix_from_rows(const nlohmann::json& rows) {
    const std::size_t r = rows.size();
    if (r == 0) throw IoError("scm: empty matrix in spec");
    const std::size_t c = rows[0].size();
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      if (rows[i].size() != c) throw IoError("scm: ragged matrix in spec");
      for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
    }
    return m;
  }
};

struct EffectTable {
  double te = 0.0;
  std::array<std::array<double, 2>, 2> ce{};
  std::array<std::array<std::size_t, 2>, 2> cell_counts{};
};

struct ScmSample {
  TabularDataset dataset;  // factual, encoded
  Matrix u_r;              // true latents per record
  Matrix u_d;
  std::vector<double> y_cf;           // counterfactual outcome under negated a
  std::vector<double> y_prob_factual; // sigmoid under observed a
  std::vector<double> y_prob_cf;      // sigmoid under negated a
  Matrix x_d_cf_raw;                  // counterfactual x_d, raw units
  EffectTable truth;
};

inline ScmSample generate_scm(const ScmSpec& spec, std::size_t n) {
  spec.validate();
  if (n < 1) throw ShapeError("generate_scm: n must be >= 1");
  Rng rng(spec.seed);

  const std::size_t k = spec.u_r_dim, m = spec.u_d_dim;
  const std::size_t q = spec.x_r_dim(), p = spec.x_d_dim();

  ScmSample out;
  out.u_r = Matrix(n, k);
  out.u_d = Matrix(n, m);
  Matrix x_r_raw(n, q), x_d_raw(n, p);
  out.x_d_cf_raw = Matrix(n, p);
  std::vector<double> a(n), y(n);
  out.y_cf.resize(n);
  out.y_prob_factual.resize(n);
  out.y_prob_cf.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) out.u_r(i, j) = rng.normal();
    for (std::size_t j = 0; j < m; ++j) out.u_d(i, j) = rng.normal();

    double a_logit = spec.c_0;
    for (std::size_t j = 0; j < k; ++j) a_logit += spec.c_a[j] * out.u_r(i, j);
    a[i] = rng.bernoulli(sigmoid_scalar(a_logit)) ? 1.0 : 0.0;

    for (std::size_t j = 0; j < q; ++j) {
      double v = spec.noise_r * rng.normal();
      for (std::size_t l = 0; l < k; ++l) v += spec.b_r(j, l) * out.u_r(i, l);
      x_r_raw(i, j) = v;
    }
    for (std::size_t j = 0; j < p; ++j) {
      double base = spec.noise_d * rng.normal();
      for (std::size_t l = 0; l < m; ++l) base += spec.b_d(j, l) * out.u_d(i, l);
      x_d_raw(i, j) = base + spec.w_a[j] * a[i];
      out.x_d_cf_raw(i, j) = base + spec.w_a[j] * (1.0 - a[i]);
    }

    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += spec.v_d[j] * out.u_d(i, j);
    for (std::size_t j = 0; j < k; ++j) s += spec.v_r[j] * out.u_r(i, j);
    const double p_factual = sigmoid_scalar(spec.v_a * a[i] + s);
    const double p_cf = sigmoid_scalar(spec.v_a * (1.0 - a[i]) + s);
    const double u_y = rng.uniform01();
    y[i] = u_y < p_factual ? 1.0 : 0.0;
    out.y_cf[i] = u_y < p_cf ? 1.0 : 0.0;
    out.y_prob_factual[i] = p_factual;
    out.y_prob_cf[i] = p_cf;
  }

  RawTable raw;
  for (std::size_t j = 0; j < p; ++j) {
    raw.x_names.push_back("xd" + std::to_string(j));
    raw.x_kinds.push_back(ColumnKind::continuous);
  }
  for (std::size_t j = 0; j < q; ++j) {
    raw.x_names.push_back("xr" + std::to_string(j));
    raw.x_kinds.push_back(ColumnKind::continuous);
  }
  raw.x_cat.resize(raw.x_names.size());
  raw.x_num.resize(raw.x_names.size());
  for (std::size_t j = 0; j < p; ++j) {
    raw.x_num[j].resize(n);
    for (std::size_t i = 0; i < n; ++i) raw.x_num[j][i] = x_d_raw(i, j);
  }
  for (std::size_t j = 0; j < q; ++j) {
    raw.x_num[p + j].resize(n);
    for (std::size_t i = 0; i < n; ++i) raw.x_num[p + j][i] = x_r_raw(i, j);
  }
  raw.a = a;
  raw.y = y;

  AttributePartition partition;
  partition.sensitive = "a";
  partition.outcome = "y";
  for (std::size_t j = 0; j < p; ++j) partition.descendants.push_back("xd" + std::to_string(j));
  for (std::size_t j = 0; j < q; ++j) partition.remainder.push_back("xr" + std::to_string(j));

  // CE conditioning cells come from sign indicators of the first two x_r
  // columns; the thresholds live in raw units.
  std::vector<Conditioner> conditioners{{"xr0", 0.0}, {"xr1", 0.0}};
  out.dataset = build_dataset(raw, partition, conditioners, {}, "scm");

  // Ground-truth effects from the known sigmoids.
  double te = 0.0;
  std::array<std::array<double, 2>, 2> ce_sum{};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += spec.v_d[j] * out.u_d(i, j);
    for (std::size_t j = 0; j < k; ++j) s += spec.v_r[j] * out.u_r(i, j);
    const double diff = sigmoid_scalar(spec.v_a + s) - sigmoid_scalar(s);
    te += diff;
    const std::size_t c0 = x_r_raw(i, 0) > 0.0 ? 1 : 0;
    const std::size_t c1 = x_r_raw(i, 1) > 0.0 ? 1 : 0;
    ce_sum[c0][c1] += diff;
    out.truth.cell_counts[c0][c1] += 1;
  }
  out.truth.te = te / static_cast<double>(n);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.truth.ce[i][j] = out.truth.cell_counts[i][j] == 0
                               ? 0.0
                               : ce_sum[i][j] / static_cast<double>(out.truth.cell_counts[i][j]);
  return out;
}

// Swaps factual and counterfactual roles; applying it twice restores the
// original sample exactly (all exogenous draws are shared).
inline ScmSample negate_scm(const ScmSample& s) {
  ScmSample out = s;
  const std::size_t n = s.dataset.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.dataset.a[i] = 1.0 - s.dataset.a[i];
    out.dataset.y[i] = s.y_cf[i];
    out.y_cf[i] = s.dataset.y[i];
    std::swap(out.y_prob_factual[i], out.y_prob_cf[i]);
  }
  // x_d blocks sit first in the canonical layout; re-encode the swapped values.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t off = 0;
    for (const ColumnEncoding& e : s.dataset.encodings) {
      if (e.name.rfind("xd", 0) == 0) {
        const std::size_t j = static_cast<std::size_t>(std::stoul(e.name.substr(2)));
        const double raw_factual = e.mean + e.std * s.dataset.records(i, off);
        out.dataset.records(i, off) = (s.x_d_cf_raw(i, j) - e.mean) / e.std;
        out.x_d_cf_raw(i, j) = raw_factual;
      }
      off += e.width();
    }
  }
  return out;
}

inline nlohmann::json truth_to_json(const EffectTable& t) {
  nlohmann::json j;
  j["te"] = t.te;
  j["ce"] = {{t.ce[0][0], t.ce[0][1]}, {t.ce[1][0], t.ce[1][1]}};
  j["cell_counts"] = {{t.cell_counts[0][0], t.cell_counts[0][1]},
                      {t.cell_counts[1][0], t.cell_counts[1][1]}};
  return j;
}

inline EffectTable truth_from_json(const nlohmann::json& j) {
  EffectTable t;
  t.te = j.at("te").get<double>();
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < 2; ++c) {
      t.ce[i][c] = j.at("ce")[i][c].get<double>();
      t.cell_counts[i][c] = j.at("cell_counts")[i][c].get<std::size_t>();
    }
  return t;
}

}  // namespace dcevae::data
