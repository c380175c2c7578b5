#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcgan/distributions.hpp"
#include "rcgan/gan.hpp"

namespace rcgan {

enum class ScoreKind { dxx, feature_matching };

std::string to_string(ScoreKind kind);
ScoreKind parse_score_kind(std::string_view name);

// Per-example anomaly scores with binary labels (0 normal, 1 anomalous).
struct ScoreReport {
  ScoreKind kind = ScoreKind::dxx;
  std::vector<double> scores;
  std::vector<int> labels;

  std::size_t size() const { return scores.size(); }
  void validate() const;
  // Columns: id, score, label.
  void write_csv(const std::filesystem::path& path) const;
  static ScoreReport read_csv(const std::filesystem::path& path, ScoreKind kind);
};

struct MetricSummary {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t predicted = 0;  // examples flagged anomalous
  std::optional<double> auroc;
};

// 1 - D_xx(x, G(E(x))), one value per row.
std::vector<double> score_dxx(const RCGANModel& model, const Tensor& x);

// || f(x, x) - f(x, G(E(x))) ||_2 where f is the input to D_xx's final layer.
std::vector<double> score_fm(const RCGANModel& model, const Tensor& x);

std::vector<double> score(const RCGANModel& model, const Tensor& x, ScoreKind kind);

// || x - G(E(x)) ||_2 per row.
std::vector<double> reconstruction_error(const RCGANModel& model, const Tensor& x);

// Flags the ceil(ratio * N) highest scores as anomalous and scores that
// prediction against the labels. Ties are broken by input order: among equal
// scores the earlier example is flagged first. ratio * N is rounded up after
// subtracting 1e-9 so that e.g. 0.3 * 10 selects exactly 3.
MetricSummary metrics_at_ratio(const ScoreReport& report, double ratio);

// Probability that a random anomaly outscores a random normal example, ties
// counted one half (Mann-Whitney statistic with mid-ranks). Throws
// InvalidArgument if either class is missing.
double auroc(const ScoreReport& report);

enum class HeatmapKind { dxz, dxx };

HeatmapKind parse_heatmap_kind(std::string_view name);
std::string to_string(HeatmapKind kind);

// D_xz(x, E(x)) or D_xx(x, G(E(x))) at every cell center of `grid`.
std::vector<double> heatmap(const RCGANModel& model, const Grid2D& grid, HeatmapKind which);

// Writes id,metric,value style CSV: precision, recall, f1, auroc, predicted.
void write_metrics_csv(const std::filesystem::path& path, const MetricSummary& m);

}  // namespace rcgan
