#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dcevae/dataset.hpp"
#include "dcevae/errors.hpp"
#include "dcevae/io_util.hpp"

namespace dcevae::data {

// UCI Adult ingestion. Column conventions:
//   sex -> a (Male = 1), income -> y (>50K = 1),
//   race (White = 1), age, native-country (United-States = 1) -> x_r,
//   workclass, education-num, marital-status, occupation, relationship,
//   capital-gain, capital-loss, hours-per-week -> x_d.
// fnlwgt and the string education column are dropped (education-num stays).
// Rows containing the "?" missing marker are dropped.

namespace adult_detail {

inline const std::vector<std::string>& workclass_categories() {
  static const std::vector<std::string> v{
      "Private",     "Self-emp-not-inc", "Self-emp-inc", "Federal-gov",
      "Local-gov",   "State-gov",        "Without-pay",  "Never-worked"};
  return v;
}
inline const std::vector<std::string>& marital_categories() {
  static const std::vector<std::string> v{
      "Married-civ-spouse", "Divorced",      "Never-married",        "Separated",
      "Widowed",            "Married-spouse-absent", "Married-AF-spouse"};
  return v;
}
inline const std::vector<std::string>& occupation_categories() {
  static const std::vector<std::string> v{
      "Tech-support",     "Craft-repair",    "Other-service",     "Sales",
      "Exec-managerial",  "Prof-specialty",  "Handlers-cleaners", "Machine-op-inspct",
      "Adm-clerical",     "Farming-fishing", "Transport-moving",  "Priv-house-serv",
      "Protective-serv",  "Armed-Forces"};
  return v;
}
inline const std::vector<std::string>& relationship_categories() {
  static const std::vector<std::string> v{"Wife",          "Own-child", "Husband",
                                          "Not-in-family", "Other-relative", "Unmarried"};
  return v;
}
inline const std::vector<std::string>& race_categories() {
  static const std::vector<std::string> v{"White", "Asian-Pac-Islander", "Amer-Indian-Eskimo",
                                          "Other", "Black"};
  return v;
}
inline const std::vector<std::string>& country_categories() {
  static const std::vector<std::string> v{
      "United-States", "Cambodia",  "England",   "Puerto-Rico", "Canada",
      "Germany",       "Outlying-US(Guam-USVI-etc)", "India",  "Japan",
      "Greece",        "South",     "China",     "Cuba",        "Iran",
      "Honduras",      "Philippines", "Italy",   "Poland",      "Jamaica",
      "Vietnam",       "Mexico",    "Portugal",  "Ireland",     "France",
      "Dominican-Republic", "Laos", "Ecuador",   "Taiwan",      "Haiti",
      "Columbia",      "Hungary",   "Guatemala", "Nicaragua",   "Scotland",
      "Thailand",      "Yugoslavia", "El-Salvador", "Trinadad&Tobago",
      "Peru",          "Hong",      "Holand-Netherlands"};
  return v;
}

inline void require_known(const std::string& value, const std::vector<std::string>& known,
                          const char* column, std::size_t row) {
  for (const std::string& k : known)
    if (k == value) return;
  throw IoError(std::string("adult: unknown category '") + value + "' in column '" + column +
                "' at data row " + std::to_string(row));
}

inline double parse_number(const std::string& value, const char* column, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string("adult: bad numeric value '") + value + "' in column '" +
                  column + "' at data row " + std::to_string(row));
  }
}

}  // namespace adult_detail

inline AttributePartition default_adult_partition() {
  AttributePartition p;
  p.sensitive = "sex";
  p.outcome = "income";
  p.remainder = {"race", "age", "native-country"};
  p.descendants = {"workclass",    "education-num", "marital-status", "occupation",
                   "relationship", "capital-gain",  "capital-loss",   "hours-per-week"};
  return p;
}

inline TabularDataset ingest_adult(const std::string& path, const AttributePartition& partition) {
  partition.validate();
  {
    const AttributePartition expect = default_adult_partition();
    auto as_set = [](std::vector<std::string> v) {
      return std::set<std::string>(v.begin(), v.end());
    };
    if (partition.sensitive != expect.sensitive || partition.outcome != expect.outcome ||
        as_set(partition.remainder) != as_set(expect.remainder) ||
        as_set(partition.descendants) != as_set(expect.descendants))
      throw UsageError(
          "adult: partition must assign sex->a, income->y, {race, age, native-country}->x_r "
          "and the remaining used columns ->x_d");
  }

  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;

  RawTable raw;
  raw.x_names = {"age",          "workclass",    "education-num", "marital-status",
                 "occupation",   "relationship", "race",          "capital-gain",
                 "capital-loss", "hours-per-week", "native-country"};
  raw.x_kinds = {ColumnKind::continuous, ColumnKind::categorical, ColumnKind::continuous,
                 ColumnKind::categorical, ColumnKind::categorical, ColumnKind::categorical,
                 ColumnKind::binary,      ColumnKind::continuous,  ColumnKind::continuous,
                 ColumnKind::continuous,  ColumnKind::binary};
  raw.x_cat.resize(raw.x_names.size());
  raw.x_num.resize(raw.x_names.size());

  using namespace adult_detail;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '|') continue;  // adult.test carries a banner line
    ++data_row;
    std::vector<std::string> f = split(t, ',');
    for (std::string& v : f) v = trim(v);
    if (f.size() != 15)
      throw IoError("adult: data row " + std::to_string(data_row) + " has " +
                    std::to_string(f.size()) + " fields, expected 15");
    bool missing = false;
    for (const std::string& v : f)
      if (v == "?") missing = true;
    if (missing) continue;

    const double age = parse_number(f[0], "age", data_row);
    require_known(f[1], workclass_categories(), "workclass", data_row);
    const double edu_num = parse_number(f[4], "education-num", data_row);
    require_known(f[5], marital_categories(), "marital-status", data_row);
    require_known(f[6], occupation_categories(), "occupation", data_row);
    require_known(f[7], relationship_categories(), "relationship", data_row);
    require_known(f[8], race_categories(), "race", data_row);
    if (f[9] != "Male" && f[9] != "Female")
      throw IoError("adult: unknown category '" + f[9] + "' in column 'sex' at data row " +
                    std::to_string(data_row));
    const double cap_gain = parse_number(f[10], "capital-gain", data_row);
    const double cap_loss = parse_number(f[11], "capital-loss", data_row);
    const double hours = parse_number(f[12], "hours-per-week", data_row);
    require_known(f[13], country_categories(), "native-country", data_row);
    std::string income = f[14];
    if (!income.empty() && income.back() == '.') income.pop_back();  // adult.test variant
    if (income != ">50K" && income != "<=50K")
      throw IoError("adult: unknown category '" + f[14] + "' in column 'income' at data row " +
                    std::to_string(data_row));

    raw.a.push_back(f[9] == "Male" ? 1.0 : 0.0);
    raw.y.push_back(income == ">50K" ? 1.0 : 0.0);
    raw.x_num[0].push_back(age);
    raw.x_cat[1].push_back(f[1]);
    raw.x_num[2].push_back(edu_num);
    raw.x_cat[3].push_back(f[5]);
    raw.x_cat[4].push_back(f[6]);
    raw.x_cat[5].push_back(f[7]);
    raw.x_num[6].push_back(f[8] == "White" ? 1.0 : 0.0);
    raw.x_num[7].push_back(cap_gain);
    raw.x_num[8].push_back(cap_loss);
    raw.x_num[9].push_back(hours);
    raw.x_num[10].push_back(f[13] == "United-States" ? 1.0 : 0.0);
  }
  if (raw.a.empty()) throw IoError("adult: no usable rows in '" + path + "'");

  std::map<std::string, std::vector<std::string>> cats{
      {"workclass", workclass_categories()},
      {"marital-status", marital_categories()},
      {"occupation", occupation_categories()},
      {"relationship", relationship_categories()}};
  std::vector<Conditioner> conditioners{{"race", 0.5}, {"native-country", 0.5}};
  return build_dataset(raw, partition, std::move(conditioners), cats, "adult:" + path);
}

}  // namespace dcevae::data
