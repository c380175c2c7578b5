#include "rcgan/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "rcgan/errors.hpp"
#include "rcgan/random.hpp"

namespace rcgan {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

TabularDataset subset(const TabularDataset& data, const std::vector<std::size_t>& rows) {
  TabularDataset out;
  out.schema = data.schema;
  out.raw = gather_rows(data.raw, rows);
  for (std::size_t r : rows) out.labels.push_back(data.labels[r]);
  return out;
}

}  // namespace

std::size_t Schema::feature_width() const {
  std::size_t w = 0;
  for (const auto& c : columns) w += c.kind == ColumnKind::continuous ? 1 : c.levels.size();
  return w;
}

std::vector<std::string> Schema::feature_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns) {
    if (c.kind == ColumnKind::continuous) {
      names.push_back(c.name);
    } else {
      for (const auto& level : c.levels) names.push_back(c.name + "=" + level);
    }
  }
  return names;
}

void Schema::validate() const {
  if (columns.empty()) throw InvalidArgument("schema declares no feature columns");
  if (normal_value == anomaly_value) {
    throw InvalidArgument("normal and anomaly label values must differ");
  }
  std::vector<std::string> seen{label_column};
  for (const auto& c : columns) {
    if (c.name.empty()) throw InvalidArgument("schema column without a name");
    if (std::find(seen.begin(), seen.end(), c.name) != seen.end()) {
      throw InvalidArgument("column '" + c.name + "' declared twice");
    }
    seen.push_back(c.name);
    if (c.kind == ColumnKind::categorical) {
      if (c.levels.empty()) throw InvalidArgument("categorical column '" + c.name + "' has no levels");
      auto sorted = c.levels;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidArgument("categorical column '" + c.name + "' repeats a level");
      }
    }
  }
}

Schema parse_schema(const std::string& text) {
  Schema schema;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("schema line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw FormatError("schema line " + std::to_string(line_no) + ": empty key or value");
    }
    if (key == "label") {
      schema.label_column = value;
    } else if (key == "normal") {
      schema.normal_value = value;
    } else if (key == "anomaly") {
      schema.anomaly_value = value;
    } else if (value == "continuous") {
      schema.columns.push_back({key, ColumnKind::continuous, {}});
    } else if (value.rfind("categorical:", 0) == 0) {
      schema.columns.push_back({key, ColumnKind::categorical, split_fields(value.substr(12))});
    } else {
      throw FormatError("schema line " + std::to_string(line_no) + ": unknown column kind '" +
                        value + "'");
    }
  }
  schema.validate();
  return schema;
}

Schema read_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_schema(ss.str());
}

MinMaxScaler MinMaxScaler::fit(const Tensor& x) {
  MinMaxScaler s;
  s.lo.assign(x.cols(), 0.0);
  s.hi.assign(x.cols(), 0.0);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double lo = x(0, c), hi = x(0, c);
    for (std::size_t r = 1; r < x.rows(); ++r) {
      lo = std::min(lo, x(r, c));
      hi = std::max(hi, x(r, c));
    }
    s.lo[c] = lo;
    s.hi[c] = hi;
  }
  return s;
}

Tensor MinMaxScaler::transform(const Tensor& x) const {
  if (x.cols() != lo.size()) throw DimensionError("scaler width does not match data");
  Tensor out(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double range = hi[c] - lo[c];
      out(r, c) = range > 0.0 ? (x(r, c) - lo[c]) / range : 0.0;
    }
  }
  return out;
}

Tensor MinMaxScaler::inverse(const Tensor& x) const {
  if (x.cols() != lo.size()) throw DimensionError("scaler width does not match data");
  Tensor out(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      out(r, c) = lo[c] + x(r, c) * (hi[c] - lo[c]);
    }
  }
  return out;
}

std::size_t TabularDataset::anomalies() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

TabularDataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) header = split_fields(line);
  }
  if (header.empty()) throw FormatError(path.string() + ": missing header row");

  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!position.emplace(header[i], i).second) {
      throw FormatError(where(path, line_no) + "duplicate column '" + header[i] + "'");
    }
  }
  auto locate = [&](const std::string& name) {
    auto it = position.find(name);
    if (it == position.end()) {
      throw FormatError(where(path, line_no) + "header lacks column '" + name + "'");
    }
    return it->second;
  };
  const std::size_t label_pos = locate(schema.label_column);
  std::vector<std::size_t> col_pos;
  for (const auto& c : schema.columns) col_pos.push_back(locate(c.name));
  if (header.size() != schema.columns.size() + 1) {
    throw FormatError(where(path, line_no) + "header has columns not in the schema");
  }

  const std::size_t width = schema.feature_width();
  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw FormatError(where(path, line_no) + "expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      if (f.empty()) throw FormatError(where(path, line_no) + "missing value");
    }
    const auto& label = fields[label_pos];
    if (label == schema.normal_value) {
      labels.push_back(0);
    } else if (label == schema.anomaly_value) {
      labels.push_back(1);
    } else {
      throw FormatError(where(path, line_no) + "label '" + label + "' is neither '" +
                        schema.normal_value + "' nor '" + schema.anomaly_value + "'");
    }
    for (std::size_t k = 0; k < schema.columns.size(); ++k) {
      const auto& spec = schema.columns[k];
      const auto& field = fields[col_pos[k]];
      if (spec.kind == ColumnKind::continuous) {
        double v = 0.0;
        if (!parse_double(field, v)) {
          throw FormatError(where(path, line_no) + "column '" + spec.name + "': '" + field +
                            "' is not a finite number");
        }
        values.push_back(v);
      } else {
        const auto it = std::find(spec.levels.begin(), spec.levels.end(), field);
        if (it == spec.levels.end()) {
          throw FormatError(where(path, line_no) + "column '" + spec.name +
                            "': unknown category '" + field + "'");
        }
        for (std::size_t l = 0; l < spec.levels.size(); ++l) {
          values.push_back(spec.levels.begin() + static_cast<std::ptrdiff_t>(l) == it ? 1.0 : 0.0);
        }
      }
    }
  }
  if (labels.empty()) throw FormatError(path.string() + ": no data rows");

  TabularDataset data;
  data.schema = schema;
  data.raw = Tensor({labels.size(), width}, std::move(values));
  data.labels = std::move(labels);
  data.scaler = MinMaxScaler::fit(data.raw);
  data.features = data.scaler.transform(data.raw);
  return data;
}

Split split(const TabularDataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train fraction must lie in (0, 1)");
  }
  const std::size_t n = data.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, Stream::split);
  std::shuffle(order.begin(), order.end(), rng);
  const auto portion =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));

  Split out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t row = order[i];
    if (i < portion && data.labels[row] == 0) {
      out.train_rows.push_back(row);
    } else {
      out.test_rows.push_back(row);
    }
  }
  if (out.train_rows.empty() || out.test_rows.empty()) {
    throw InvalidArgument("split leaves the " +
                          std::string(out.train_rows.empty() ? "training" : "test") +
                          " side empty");
  }
  out.train = subset(data, out.train_rows);
  out.test = subset(data, out.test_rows);
  const auto scaler = MinMaxScaler::fit(out.train.raw);
  for (TabularDataset* side : {&out.train, &out.test}) {
    side->scaler = scaler;
    side->features = scaler.transform(side->raw);
  }
  return out;
}

LabeledTable read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) header = split_fields(line);
  }
  if (header.empty()) throw FormatError(path.string() + ": missing header row");
  const auto label_it = std::find(header.begin(), header.end(), "label");
  const bool has_label = label_it != header.end();
  const auto label_pos = static_cast<std::size_t>(label_it - header.begin());

  LabeledTable table;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!has_label || i != label_pos) table.names.push_back(header[i]);
  }
  if (table.names.empty()) throw FormatError(path.string() + ": no feature columns");

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw FormatError(where(path, line_no) + "expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (has_label && i == label_pos) {
        if (fields[i] != "0" && fields[i] != "1") {
          throw FormatError(where(path, line_no) + "label must be 0 or 1");
        }
        table.labels.push_back(fields[i] == "1" ? 1 : 0);
        continue;
      }
      double v = 0.0;
      if (!parse_double(fields[i], v)) {
        throw FormatError(where(path, line_no) + "column '" + header[i] + "': '" + fields[i] +
                          "' is not a finite number");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw FormatError(path.string() + ": no data rows");
  table.x = Tensor({rows, table.names.size()}, std::move(values));
  return table;
}

void write_numeric_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                       const Tensor& x, const std::vector<int>& labels) {
  if (names.size() != x.cols()) throw DimensionError("column names do not match data width");
  if (!labels.empty() && labels.size() != x.rows()) {
    throw DimensionError("label count does not match row count");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  if (!labels.empty()) out << ",label";
  out << '\n';
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out << (c ? "," : "") << format_number(x(r, c));
    if (!labels.empty()) out << ',' << labels[r];
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace rcgan
