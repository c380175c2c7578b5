#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rcgan/tensor.hpp"

namespace rcgan {

enum class ColumnKind { continuous, categorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  std::vector<std::string> levels;  // categorical only, in one-hot order
};

// Parsed from a key-value text file:
//
//   # comment
//   label = outcome          column holding the class
//   normal = 0               label value of normal rows (default 0)
//   anomaly = 1              label value of anomalous rows (default 1)
//   duration = continuous
//   protocol = categorical:tcp,udp,icmp
//
// Feature columns keep the order in which they are listed.
struct Schema {
  std::vector<ColumnSpec> columns;
  std::string label_column = "label";
  std::string normal_value = "0";
  std::string anomaly_value = "1";

  // Width after one-hot expansion.
  std::size_t feature_width() const;
  // "duration", "protocol=tcp", ...
  std::vector<std::string> feature_names() const;
  void validate() const;
};

Schema parse_schema(const std::string& text);
Schema read_schema(const std::filesystem::path& path);

// Per-feature min-max scaling to [0, 1]. Constant features map to 0. One-hot
// features are fitted like any other column, which leaves them unchanged
// whenever both levels occur.
struct MinMaxScaler {
  std::vector<double> lo;
  std::vector<double> hi;

  static MinMaxScaler fit(const Tensor& x);
  Tensor transform(const Tensor& x) const;
  Tensor inverse(const Tensor& x) const;
};

struct TabularDataset {
  Schema schema;
  Tensor raw;       // one-hot expanded, unscaled
  Tensor features;  // scaler.transform(raw)
  std::vector<int> labels;  // 0 normal, 1 anomalous
  MinMaxScaler scaler;

  std::size_t rows() const { return raw.rows(); }
  std::size_t anomalies() const;
};

// Reads a CSV whose header names exactly the schema columns plus the label
// column, in any order. Fields are comma separated and unquoted; blank lines
// are skipped. The scaler is fitted on every loaded row.
TabularDataset load_csv(const std::filesystem::path& path, const Schema& schema);

struct Split {
  TabularDataset train;  // normal rows only
  TabularDataset test;
  std::vector<std::size_t> train_rows;  // indices into the source dataset
  std::vector<std::size_t> test_rows;
};

// Shuffles rows with the seed's split stream and takes floor(fraction * N)
// of them as the training portion. Anomalous rows drawn into that portion
// are moved to the test side, so the two index sets partition the data. The
// scaler is refitted on the training rows and applied to both sides.
Split split(const TabularDataset& data, double train_fraction, std::uint64_t seed);

// Plain numeric table with an optional 0/1 "label" column.
struct LabeledTable {
  std::vector<std::string> names;  // feature columns
  Tensor x;
  std::vector<int> labels;  // empty when the file had no label column
};

LabeledTable read_numeric_csv(const std::filesystem::path& path);
void write_numeric_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                       const Tensor& x, const std::vector<int>& labels = {});

}  // namespace rcgan
