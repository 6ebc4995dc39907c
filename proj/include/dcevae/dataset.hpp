#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcevae/errors.hpp"
#include "dcevae/io_util.hpp"
#include "dcevae/matrix.hpp"
#include "dcevae/rng.hpp"

namespace dcevae::data {

using nlohmann::json;

enum class ColumnKind { binary, categorical, continuous };

inline std::string to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::binary: return "binary";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::continuous: return "continuous";
  }
  throw UsageError("bad ColumnKind");
}
inline ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "binary") return ColumnKind::binary;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "continuous") return ColumnKind::continuous;
  throw IoError("unknown column kind '" + s + "'");
}

// How one raw column maps to encoded columns: binary -> one 0/1 column,
// categorical -> one-hot block, continuous -> one standardized column.
struct ColumnEncoding {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  std::vector<std::string> categories;  // one-hot order
  double mean = 0.0;
  double std = 1.0;

  std::size_t width() const {
    return kind == ColumnKind::categorical ? categories.size() : 1;
  }

  void validate() const {
    if (name.empty()) throw ShapeError("ColumnEncoding: empty name");
    if (kind == ColumnKind::categorical && categories.size() < 2)
      throw ShapeError("ColumnEncoding '" + name + "': one-hot needs >= 2 categories");
    if (kind == ColumnKind::continuous && !(std > 0.0))
      throw ShapeError("ColumnEncoding '" + name + "': std must be > 0");
  }

  json to_json() const {
    json j{{"name", name}, {"kind", to_string(kind)}};
    if (kind == ColumnKind::categorical) j["categories"] = categories;
    if (kind == ColumnKind::continuous) {
      j["mean"] = mean;
      j["std"] = std;
    }
    return j;
  }
  static ColumnEncoding from_json(const json& j) {
    ColumnEncoding e;
    e.name = j.at("name").get<std::string>();
    e.kind = column_kind_from_string(j.at("kind").get<std::string>());
    if (e.kind == ColumnKind::categorical)
      e.categories = j.at("categories").get<std::vector<std::string>>();
    if (e.kind == ColumnKind::continuous) {
      e.mean = j.at("mean").get<double>();
      e.std = j.at("std").get<double>();
    }
    e.validate();
    return e;
  }
};

struct AttributePartition {
  std::string sensitive;
  std::string outcome;
  std::vector<std::string> descendants;  // x_d
  std::vector<std::string> remainder;    // x_r

  void validate() const {
    if (sensitive.empty() || outcome.empty())
      throw ShapeError("AttributePartition: sensitive and outcome are required");
    std::set<std::string> seen{sensitive, outcome};
    for (const auto& group : {descendants, remainder})
      for (const std::string& c : group)
        if (!seen.insert(c).second)
          throw ShapeError("AttributePartition: column '" + c + "' appears twice");
  }

  json to_json() const {
    return json{{"sensitive", sensitive},
                {"outcome", outcome},
                {"descendants", descendants},
                {"remainder", remainder}};
  }
  static AttributePartition from_json(const json& j) {
    AttributePartition p;
    p.sensitive = j.at("sensitive").get<std::string>();
    p.outcome = j.at("outcome").get<std::string>();
    p.descendants = j.at("descendants").get<std::vector<std::string>>();
    p.remainder = j.at("remainder").get<std::vector<std::string>>();
    p.validate();
    return p;
  }
};

// A binary conditioning variable for CE tables: indicator(raw value > threshold).
struct Conditioner {
  std::string column;
  double threshold = 0.5;

  json to_json() const { return json{{"column", column}, {"threshold", threshold}}; }
  static Conditioner from_json(const json& j) {
    return Conditioner{j.at("column").get<std::string>(), j.at("threshold").get<double>()};
  }
};

struct EncodedBlock {
  std::string name;
  std::size_t offset = 0;  // within records
  std::size_t width = 0;
  const ColumnEncoding* encoding = nullptr;
};

// Encoded tabular dataset. Feature columns are stored canonically: all x_d
// blocks first, then all x_r blocks, each group ordered by column name, so
// the physical order of the source file never leaks into model inputs.
struct TabularDataset {
  AttributePartition partition;
  std::vector<ColumnEncoding> encodings;  // canonical order, x_d group then x_r group
  Matrix records;                         // encoded x values
  std::vector<double> a;                  // {0,1}
  std::vector<double> y;                  // {0,1}
  std::vector<Conditioner> conditioners;
  std::string source_tag;

  std::size_t size() const { return a.size(); }

  std::size_t group_width(const std::vector<std::string>& group) const {
    std::size_t w = 0;
    for (const std::string& name : group) w += encoding(name).width();
    return w;
  }
  std::size_t xd_width() const { return group_width(partition.descendants); }
  std::size_t xr_width() const { return group_width(partition.remainder); }

  const ColumnEncoding& encoding(const std::string& name) const {
    for (const ColumnEncoding& e : encodings)
      if (e.name == name) return e;
    throw ShapeError("dataset: no encoding for column '" + name + "'");
  }

  std::vector<EncodedBlock> layout() const {
    std::vector<EncodedBlock> blocks;
    std::size_t off = 0;
    for (const ColumnEncoding& e : encodings) {
      blocks.push_back(EncodedBlock{e.name, off, e.width(), &e});
      off += e.width();
    }
    return blocks;
  }

  EncodedBlock block(const std::string& name) const {
    for (const EncodedBlock& b : layout())
      if (b.name == name) return b;
    throw ShapeError("dataset: no column '" + name + "'");
  }

  void validate() const {
    partition.validate();
    std::size_t total = 0;
    for (const ColumnEncoding& e : encodings) {
      e.validate();
      total += e.width();
    }
    if (records.cols() != total)
      throw ShapeError("dataset: record width " + std::to_string(records.cols()) +
                       " != encoded width " + std::to_string(total));
    if (records.rows() != a.size() || a.size() != y.size())
      throw ShapeError("dataset: row counts differ between records, a, y");
    for (double v : a)
      if (v != 0.0 && v != 1.0) throw ShapeError("dataset: a must be 0/1");
    for (double v : y)
      if (v != 0.0 && v != 1.0) throw ShapeError("dataset: y must be 0/1");
    if (!records.all_finite()) throw NumericError("dataset: non-finite encoded value");
    // canonical order: x_d group then x_r group, each name-sorted
    std::vector<std::string> expected = sorted(partition.descendants);
    const std::vector<std::string> xr = sorted(partition.remainder);
    expected.insert(expected.end(), xr.begin(), xr.end());
    if (encodings.size() != expected.size())
      throw ShapeError("dataset: encodings do not cover the partition");
    for (std::size_t i = 0; i < expected.size(); ++i)
      if (encodings[i].name != expected[i])
        throw ShapeError("dataset: encodings not in canonical order at '" +
                         encodings[i].name + "'");
  }

  static std::vector<std::string> sorted(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  }

  Matrix a_column() const { return Matrix(a.size(), 1, a); }
  Matrix y_column() const { return Matrix(y.size(), 1, y); }

  Matrix xd_matrix() const { return slice(0, xd_width()); }
  Matrix xr_matrix() const { return slice(xd_width(), xr_width()); }

  Matrix slice(std::size_t begin, std::size_t width) const {
    Matrix out(records.rows(), width);
    for (std::size_t r = 0; r < records.rows(); ++r)
      for (std::size_t c = 0; c < width; ++c) out(r, c) = records(r, begin + c);
    return out;
  }

  // ---- decoding back to raw values ----

  // De-standardized value of a continuous/binary column from an encoded
  // matrix laid out like `records`.
  double raw_numeric(const Matrix& encoded, std::size_t row, const EncodedBlock& b) const {
    if (b.encoding->kind == ColumnKind::categorical)
      throw ShapeError("raw_numeric: column '" + b.name + "' is categorical");
    const double v = encoded(row, b.offset);
    if (b.encoding->kind == ColumnKind::continuous)
      return b.encoding->mean + b.encoding->std * v;
    return v;
  }

  // Category index: binary thresholded at 0.5, one-hot by argmax.
  std::size_t raw_category(const Matrix& encoded, std::size_t row, const EncodedBlock& b) const {
    if (b.encoding->kind == ColumnKind::continuous)
      throw ShapeError("raw_category: column '" + b.name + "' is continuous");
    if (b.encoding->kind == ColumnKind::binary)
      return encoded(row, b.offset) > 0.5 ? 1 : 0;
    std::size_t best = 0;
    for (std::size_t c = 1; c < b.width; ++c)
      if (encoded(row, b.offset + c) > encoded(row, b.offset + best)) best = c;
    return best;
  }

  bool conditioner_value(const Matrix& encoded, std::size_t row, const Conditioner& c) const {
    const EncodedBlock b = block(c.column);
    if (b.encoding->kind == ColumnKind::categorical)
      throw ShapeError("conditioner '" + c.column + "' must be binary or continuous");
    return raw_numeric(encoded, row, b) > c.threshold;
  }
  bool conditioner_value(std::size_t row, const Conditioner& c) const {
    return conditioner_value(records, row, c);
  }

  TabularDataset subset(const std::vector<std::size_t>& rows) const {
    TabularDataset out = *this;
    out.records = Matrix(rows.size(), records.cols());
    out.a.resize(rows.size());
    out.y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t r = rows[i];
      out.a[i] = a[r];
      out.y[i] = y[r];
      for (std::size_t c = 0; c < records.cols(); ++c) out.records(i, c) = records(r, c);
    }
    return out;
  }
};

// Lays out raw parsed columns into a canonical encoded dataset. Raw column
// values arrive as strings for categorical columns and doubles otherwise.
struct RawTable {
  std::vector<std::string> x_names;
  std::vector<ColumnKind> x_kinds;
  std::vector<std::vector<std::string>> x_cat;  // per column, per row (categorical)
  std::vector<std::vector<double>> x_num;       // per column, per row (binary/continuous)
  std::vector<double> a;
  std::vector<double> y;
};

inline TabularDataset build_dataset(const RawTable& raw, const AttributePartition& partition,
                                    std::vector<Conditioner> conditioners,
                                    const std::map<std::string, std::vector<std::string>>& category_sets,
                                    const std::string& source_tag) {
  partition.validate();
  const std::size_t n = raw.a.size();
  auto col_index = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < raw.x_names.size(); ++i)
      if (raw.x_names[i] == name) return i;
    throw ShapeError("build_dataset: partition names missing column '" + name + "'");
  };

  TabularDataset ds;
  ds.partition = partition;
  ds.conditioners = std::move(conditioners);
  ds.source_tag = source_tag;

  std::vector<std::string> order = TabularDataset::sorted(partition.descendants);
  const std::vector<std::string> xr = TabularDataset::sorted(partition.remainder);
  order.insert(order.end(), xr.begin(), xr.end());

  // fit encodings
  for (const std::string& name : order) {
    const std::size_t ci = col_index(name);
    ColumnEncoding e;
    e.name = name;
    e.kind = raw.x_kinds[ci];
    if (e.kind == ColumnKind::categorical) {
      const auto it = category_sets.find(name);
      if (it == category_sets.end())
        throw ShapeError("build_dataset: no category set for '" + name + "'");
      e.categories = it->second;
      for (std::size_t r = 0; r < n; ++r) {
        const std::string& v = raw.x_cat[ci][r];
        if (std::find(e.categories.begin(), e.categories.end(), v) == e.categories.end())
          throw IoError("unknown category '" + v + "' in column '" + name + "' at row " +
                        std::to_string(r));
      }
    } else if (e.kind == ColumnKind::continuous) {
      double mean = 0.0;
      for (double v : raw.x_num[ci]) mean += v;
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (double v : raw.x_num[ci]) var += (v - mean) * (v - mean);
      var /= static_cast<double>(n);
      if (!(var > 0.0))
        throw IoError("column '" + name + "' is constant; cannot standardize");
      e.mean = mean;
      e.std = std::sqrt(var);
    }
    e.validate();
    ds.encodings.push_back(std::move(e));
  }

  std::size_t width = 0;
  for (const ColumnEncoding& e : ds.encodings) width += e.width();
  ds.records = Matrix(n, width);
  ds.a = raw.a;
  ds.y = raw.y;

  std::size_t off = 0;
  for (const ColumnEncoding& e : ds.encodings) {
    const std::size_t ci = col_index(e.name);
    for (std::size_t r = 0; r < n; ++r) {
      if (e.kind == ColumnKind::categorical) {
        const std::string& v = raw.x_cat[ci][r];
        for (std::size_t c = 0; c < e.categories.size(); ++c)
          ds.records(r, off + c) = (e.categories[c] == v) ? 1.0 : 0.0;
      } else if (e.kind == ColumnKind::continuous) {
        ds.records(r, off) = (raw.x_num[ci][r] - e.mean) / e.std;
      } else {
        const double v = raw.x_num[ci][r];
        if (v != 0.0 && v != 1.0)
          throw IoError("binary column '" + e.name + "' has non 0/1 value at row " +
                        std::to_string(r));
        ds.records(r, off) = v;
      }
    }
    off += e.width();
  }
  ds.validate();
  return ds;
}

// Seeded disjoint split. Continuous encodings are refit on the training
// rows and reused unchanged on the test rows.
inline std::pair<TabularDataset, TabularDataset> split(const TabularDataset& ds,
                                                       double test_fraction, Rng& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw UsageError("split: test fraction must be in (0, 1)");
  const std::size_t n = ds.size();
  if (n < 2) throw ShapeError("split: need at least 2 records");
  std::size_t n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::max<std::size_t>(1, std::min(n_test, n - 1));

  const std::vector<std::size_t> perm = rng.permutation(n);
  std::vector<std::size_t> test_rows(perm.begin(), perm.begin() + n_test);
  std::vector<std::size_t> train_rows(perm.begin() + n_test, perm.end());
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  TabularDataset train = ds.subset(train_rows);
  TabularDataset test = ds.subset(test_rows);

  // Refit continuous columns on train; re-standardize both sides.
  std::size_t off = 0;
  for (std::size_t ei = 0; ei < train.encodings.size(); ++ei) {
    ColumnEncoding& e = train.encodings[ei];
    if (e.kind == ColumnKind::continuous) {
      const double old_mean = e.mean, old_std = e.std;
      double mean = 0.0;
      for (std::size_t r = 0; r < train.size(); ++r)
        mean += old_mean + old_std * train.records(r, off);
      mean /= static_cast<double>(train.size());
      double var = 0.0;
      for (std::size_t r = 0; r < train.size(); ++r) {
        const double raw = old_mean + old_std * train.records(r, off);
        var += (raw - mean) * (raw - mean);
      }
      var /= static_cast<double>(train.size());
      if (!(var > 0.0))
        throw NumericError("split: column '" + e.name + "' constant on the training rows");
      const double stdev = std::sqrt(var);
      for (std::size_t r = 0; r < train.size(); ++r) {
        const double raw = old_mean + old_std * train.records(r, off);
        train.records(r, off) = (raw - mean) / stdev;
      }
      for (std::size_t r = 0; r < test.size(); ++r) {
        const double raw = old_mean + old_std * test.records(r, off);
        test.records(r, off) = (raw - mean) / stdev;
      }
      e.mean = mean;
      e.std = stdev;
      test.encodings[ei].mean = mean;
      test.encodings[ei].std = stdev;
    }
    off += e.width();
  }
  return {std::move(train), std::move(test)};
}

// ---- CSV + JSON sidecar ----

inline json dataset_sidecar(const TabularDataset& ds) {
  json j;
  j["format"] = "dcevae-dataset/1";
  j["source"] = ds.source_tag;
  j["partition"] = ds.partition.to_json();
  j["encodings"] = json::array();
  for (const ColumnEncoding& e : ds.encodings) j["encodings"].push_back(e.to_json());
  j["conditioners"] = json::array();
  for (const Conditioner& c : ds.conditioners) j["conditioners"].push_back(c.to_json());
  j["records"] = ds.size();
  return j;
}

inline std::vector<std::string> encoded_header(const TabularDataset& ds) {
  std::vector<std::string> names{ds.partition.sensitive, ds.partition.outcome};
  for (const EncodedBlock& b : ds.layout()) {
    if (b.encoding->kind == ColumnKind::categorical) {
      for (const std::string& cat : b.encoding->categories)
        names.push_back(b.name + "=" + cat);
    } else {
      names.push_back(b.name);
    }
  }
  return names;
}

inline void save_dataset(const TabularDataset& ds, const std::string& stem) {
  std::string csv;
  const std::vector<std::string> header = encoded_header(ds);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) csv += ',';
    csv += header[i];
  }
  csv += '\n';
  for (std::size_t r = 0; r < ds.size(); ++r) {
    csv += format_double(ds.a[r]);
    csv += ',';
    csv += format_double(ds.y[r]);
    for (std::size_t c = 0; c < ds.records.cols(); ++c) {
      csv += ',';
      csv += format_double(ds.records(r, c));
    }
    csv += '\n';
  }
  write_text_file(stem + ".csv", csv);
  write_text_file(stem + ".json", dataset_sidecar(ds).dump(2) + "\n");
}

inline TabularDataset load_dataset(const std::string& stem) {
  const json j = json::parse(read_text_file(stem + ".json"));
  if (j.value("format", "") != "dcevae-dataset/1")
    throw IoError("'" + stem + ".json' is not a dcevae dataset sidecar");
  TabularDataset ds;
  ds.partition = AttributePartition::from_json(j.at("partition"));
  for (const json& e : j.at("encodings")) ds.encodings.push_back(ColumnEncoding::from_json(e));
  for (const json& c : j.at("conditioners")) ds.conditioners.push_back(Conditioner::from_json(c));
  ds.source_tag = j.value("source", "");

  const std::string csv = read_text_file(stem + ".csv");
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + stem + ".csv' is empty");
  const std::vector<std::string> header = split(trim(line), ',');
  std::size_t width = 0;
  for (const ColumnEncoding& e : ds.encodings) width += e.width();
  if (header.size() != width + 2)
    throw IoError("'" + stem + ".csv' header has " + std::to_string(header.size()) +
                  " columns, sidecar expects " + std::to_string(width + 2));

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::vector<std::string> fields = split(t, ',');
    if (fields.size() != width + 2)
      throw IoError("'" + stem + ".csv' row " + std::to_string(rows + 1) + " has " +
                    std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(width + 2));
    for (const std::string& f : fields) {
      try {
        values.push_back(std::stod(f));
      } catch (const std::exception&) {
        throw IoError("'" + stem + ".csv' row " + std::to_string(rows + 1) +
                      ": bad number '" + f + "'");
      }
    }
    ++rows;
  }
  ds.a.resize(rows);
  ds.y.resize(rows);
  ds.records = Matrix(rows, width);
  for (std::size_t r = 0; r < rows; ++r) {
    ds.a[r] = values[r * (width + 2)];
    ds.y[r] = values[r * (width + 2) + 1];
    for (std::size_t c = 0; c < width; ++c)
      ds.records(r, c) = values[r * (width + 2) + 2 + c];
  }
  ds.validate();
  return ds;
}

}  // namespace dcevae::data
