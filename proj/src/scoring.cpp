#include "rcgan/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rcgan/errors.hpp"

namespace rcgan {

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

Tensor reconstruct(const RCGANModel& model, const Tensor& x) {
  return predict(model.generator, predict(model.encoder, x));
}

void check_input(const RCGANModel& model, const Tensor& x) {
  if (x.rank() != 2 || x.cols() != model.x_dim()) {
    throw DimensionError("input width " + std::to_string(x.cols()) +
                         " does not match model data width " + std::to_string(model.x_dim()));
  }
}

}  // namespace

std::string to_string(ScoreKind kind) {
  return kind == ScoreKind::dxx ? "dxx" : "feature-matching";
}

ScoreKind parse_score_kind(std::string_view name) {
  if (name == "dxx") return ScoreKind::dxx;
  if (name == "fm" || name == "feature-matching" || name == "feature_matching") {
    return ScoreKind::feature_matching;
  }
  throw InvalidArgument("unknown score kind '" + std::string(name) + "'");
}

void ScoreReport::validate() const {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  for (int label : labels) {
    if (label != 0 && label != 1) throw InvalidArgument("labels must be 0 or 1");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw NumericError("non-finite anomaly score");
  }
}

void ScoreReport::write_csv(const std::filesystem::path& path) const {
  validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "id,score,label\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out << i << ',' << format_number(scores[i]) << ',' << labels[i] << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

ScoreReport ScoreReport::read_csv(const std::filesystem::path& path, ScoreKind kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  ScoreReport report;
  report.kind = kind;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::stringstream ss(line);
    std::string id, score, label;
    if (!std::getline(ss, id, ',') || !std::getline(ss, score, ',') || !std::getline(ss, label)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected id,score,label");
    }
    double s = 0.0;
    auto [ptr, ec] = std::from_chars(score.data(), score.data() + score.size(), s);
    if (ec != std::errc() || (label != "0" && label != "1")) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
    report.scores.push_back(s);
    report.labels.push_back(label == "1" ? 1 : 0);
  }
  return report;
}

std::vector<double> score_dxx(const RCGANModel& model, const Tensor& x) {
  check_input(model, x);
  const Tensor d = predict(model.disc_xx, concat_cols(x, reconstruct(model, x)));
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = std::clamp(1.0 - d[i], 0.0, 1.0);
  return out;
}

std::vector<double> score_fm(const RCGANModel& model, const Tensor& x) {
  check_input(model, x);
  const auto same = forward(model.disc_xx, concat_cols(x, x));
  const auto recon = forward(model.disc_xx, concat_cols(x, reconstruct(model, x)));
  const Tensor& a = same.penultimate();
  const Tensor& b = recon.penultimate();
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      const double d = a(r, c) - b(r, c);
      s += d * d;
    }
    out[r] = std::sqrt(s);
  }
  return out;
}

std::vector<double> score(const RCGANModel& model, const Tensor& x, ScoreKind kind) {
  return kind == ScoreKind::dxx ? score_dxx(model, x) : score_fm(model, x);
}

std::vector<double> reconstruction_error(const RCGANModel& model, const Tensor& x) {
  check_input(model, x);
  const Tensor recon = reconstruct(model, x);
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double d = x(r, c) - recon(r, c);
      s += d * d;
    }
    out[r] = std::sqrt(s);
  }
  return out;
}

MetricSummary metrics_at_ratio(const ScoreReport& report, double ratio) {
  report.validate();
  if (report.size() == 0) throw InvalidArgument("score report is empty");
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("ratio must lie in (0, 1)");
  const std::size_t n = report.size();
  const auto k = static_cast<std::size_t>(
      std::max(1.0, std::ceil(ratio * static_cast<double>(n) - 1e-9)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.scores[a] > report.scores[b];
  });

  std::size_t true_pos = 0;
  for (std::size_t i = 0; i < k; ++i) true_pos += report.labels[order[i]] == 1;
  const auto positives =
      static_cast<std::size_t>(std::count(report.labels.begin(), report.labels.end(), 1));

  MetricSummary m;
  m.predicted = k;
  m.precision = static_cast<double>(true_pos) / static_cast<double>(k);
  m.recall = positives ? static_cast<double>(true_pos) / static_cast<double>(positives) : 0.0;
  // 2TP / (2TP + FP + FN), the harmonic mean of precision and recall.
  m.f1 = static_cast<double>(2 * true_pos) / static_cast<double>(k + positives);
  return m;
}

double auroc(const ScoreReport& report) {
  report.validate();
  const std::size_t n = report.size();
  const auto positives =
      static_cast<std::size_t>(std::count(report.labels.begin(), report.labels.end(), 1));
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw InvalidArgument("AUROC is undefined unless both classes are present");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return report.scores[a] < report.scores[b]; });

  // Mid-ranks (1-based) of tie groups; twice the rank keeps sums integral.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && report.scores[order[j]] == report.scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (report.labels[order[k]] == 1) positive_rank_sum += mid_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

HeatmapKind parse_heatmap_kind(std::string_view name) {
  if (name == "dxz") return HeatmapKind::dxz;
  if (name == "dxx") return HeatmapKind::dxx;
  throw InvalidArgument("unknown heatmap kind '" + std::string(name) + "'");
}

std::string to_string(HeatmapKind kind) { return kind == HeatmapKind::dxz ? "dxz" : "dxx"; }

std::vector<double> heatmap(const RCGANModel& model, const Grid2D& grid, HeatmapKind which) {
  grid.validate();
  if (model.x_dim() != 2) throw InvalidArgument("heatmaps need a model over 2-D data");
  const Tensor x = grid.centers();
  const Tensor encoded = predict(model.encoder, x);
  const Tensor d = which == HeatmapKind::dxz
                       ? predict(model.disc_xz, concat_cols(x, encoded))
                       : predict(model.disc_xx, concat_cols(x, predict(model.generator, encoded)));
  return std::vector<double>(d.values().begin(), d.values().end());
}

void write_metrics_csv(const std::filesystem::path& path, const MetricSummary& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "precision,recall,f1,auroc,predicted\n";
  out << format_number(m.precision) << ',' << format_number(m.recall) << ','
      << format_number(m.f1) << ',' << (m.auroc ? format_number(*m.auroc) : std::string("nan"))
      << ',' << m.predicted << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace rcgan
