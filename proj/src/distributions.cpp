#include "rcgan/distributions.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "rcgan/errors.hpp"

namespace rcgan {

namespace {

constexpr double kPi = std::numbers::pi;
// Arc covers angles [-30, 210] degrees.
constexpr double kArcStart = -kPi / 6.0;
constexpr double kArcEnd = 7.0 * kPi / 6.0;

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidArgument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  for (auto part : split(text, ',')) out.push_back(parse_number(part));
  return out;
}

std::size_t parse_count(std::string_view text) {
  const double v = parse_number(text);
  if (v < 1.0 || v != std::floor(v)) {
    throw InvalidArgument("expected a positive integer, got '" + std::string(text) + "'");
  }
  return static_cast<std::size_t>(v);
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_number(values[i]);
  }
  return out;
}

double normal_pdf(double x, double mean, double sd) {
  const double u = (x - mean) / sd;
  return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * kPi));
}

double ring_density(double x, double y, double noise) {
  const double r = std::hypot(x, y);
  if (r == 0.0) return 0.0;
  return normal_pdf(r, 1.0, noise) / (2.0 * kPi * r);
}

const double kDotCenters[4][2] = {{1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}};

}  // namespace

DistSpec DistSpec::loop(double noise) {
  DistSpec s;
  s.kind = DistKind::loop;
  s.noise = noise;
  return s;
}

DistSpec DistSpec::arc(double noise) {
  DistSpec s;
  s.kind = DistKind::arc;
  s.noise = noise;
  return s;
}

DistSpec DistSpec::four_dot(double noise) {
  DistSpec s;
  s.kind = DistKind::four_dot;
  s.noise = noise;
  return s;
}

DistSpec DistSpec::gaussian(std::vector<double> mean, std::vector<double> variance) {
  DistSpec s;
  s.kind = DistKind::gaussian;
  s.dim = mean.size();
  s.mean = std::move(mean);
  s.variance = std::move(variance);
  s.validate();
  return s;
}

DistSpec DistSpec::standard_normal(std::size_t dim, double variance) {
  return gaussian(std::vector<double>(dim, 0.0), std::vector<double>(dim, variance));
}

DistSpec DistSpec::uniform(std::vector<double> lo, std::vector<double> hi) {
  DistSpec s;
  s.kind = DistKind::uniform;
  s.dim = lo.size();
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  s.validate();
  return s;
}

DistSpec DistSpec::box(std::size_t dim, double lo, double hi) {
  return uniform(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
}

void DistSpec::validate() const {
  if (dim == 0) throw InvalidArgument("distribution dimension must be positive");
  switch (kind) {
    case DistKind::loop:
    case DistKind::arc:
    case DistKind::four_dot:
      if (dim != 2) throw InvalidArgument("loop, arc and four-dot are 2-D only");
      if (!(noise > 0.0)) throw InvalidArgument("shape noise must be positive");
      break;
    case DistKind::gaussian:
      if (mean.size() != dim || variance.size() != dim) {
        throw InvalidArgument("gaussian mean/variance length must equal dimension");
      }
      for (double v : variance) {
        if (!(v > 0.0)) throw InvalidArgument("gaussian variances must be positive");
      }
      break;
    case DistKind::uniform:
      if (lo.size() != dim || hi.size() != dim) {
        throw InvalidArgument("uniform bounds length must equal dimension");
      }
      for (std::size_t i = 0; i < dim; ++i) {
        if (!(lo[i] < hi[i])) throw InvalidArgument("uniform box needs lo < hi on every axis");
      }
      break;
  }
}

double DistSpec::density(double x, double y) const {
  if (dim != 2) throw InvalidArgument("density is only defined for 2-D specs");
  switch (kind) {
    case DistKind::loop:
      return ring_density(x, y, noise);
    case DistKind::arc: {
      if (x == 0.0 && y == 0.0) return 0.0;
      double angle = std::atan2(y, x);
      if (angle < kArcStart) angle += 2.0 * kPi;
      if (angle > kArcEnd) return 0.0;
      return ring_density(x, y, noise) * (2.0 * kPi) / (kArcEnd - kArcStart);
    }
    case DistKind::four_dot: {
      // centers at (+-1, +-1): the mixture factorises per axis
      const double fx = normal_pdf(x, 1.0, noise) + normal_pdf(x, -1.0, noise);
      const double fy = normal_pdf(y, 1.0, noise) + normal_pdf(y, -1.0, noise);
      return 0.25 * fx * fy;
    }
    case DistKind::gaussian:
      return normal_pdf(x, mean[0], std::sqrt(variance[0])) *
             normal_pdf(y, mean[1], std::sqrt(variance[1]));
    case DistKind::uniform: {
      const bool inside = x >= lo[0] && x <= hi[0] && y >= lo[1] && y <= hi[1];
      return inside ? 1.0 / ((hi[0] - lo[0]) * (hi[1] - lo[1])) : 0.0;
    }
  }
  return 0.0;
}

DistSpec parse_dist_spec(std::string_view text) {
  auto parts = split(text, ':');
  const auto name = parts[0];
  auto shape = [&](DistSpec s) {
    if (parts.size() > 2) throw InvalidArgument("too many fields in '" + std::string(text) + "'");
    if (parts.size() == 2) s.noise = parse_number(parts[1]);
    s.validate();
    return s;
  };
  if (name == "loop") return shape(DistSpec::loop());
  if (name == "arc") return shape(DistSpec::arc());
  if (name == "four-dot" || name == "four_dot") return shape(DistSpec::four_dot());
  if (name == "gaussian" && parts.size() == 3) {
    return DistSpec::gaussian(parse_list(parts[1]), parse_list(parts[2]));
  }
  if (name == "normal" && (parts.size() == 2 || parts.size() == 3)) {
    return DistSpec::standard_normal(parse_count(parts[1]),
                                     parts.size() == 3 ? parse_number(parts[2]) : 1.0);
  }
  if (name == "uniform" && parts.size() == 3) {
    return DistSpec::uniform(parse_list(parts[1]), parse_list(parts[2]));
  }
  if (name == "box" && parts.size() == 4) {
    return DistSpec::box(parse_count(parts[1]), parse_number(parts[2]), parse_number(parts[3]));
  }
  throw InvalidArgument("cannot parse distribution '" + std::string(text) + "'");
}

std::string to_string(const DistSpec& spec) {
  switch (spec.kind) {
    case DistKind::loop: return "loop:" + format_number(spec.noise);
    case DistKind::arc: return "arc:" + format_number(spec.noise);
    case DistKind::four_dot: return "four-dot:" + format_number(spec.noise);
    case DistKind::gaussian:
      return "gaussian:" + format_list(spec.mean) + ":" + format_list(spec.variance);
    case DistKind::uniform:
      return "uniform:" + format_list(spec.lo) + ":" + format_list(spec.hi);
  }
  return {};
}

void Grid2D::validate() const {
  if (nx < 2 || ny < 2) throw InvalidArgument("grid resolution must be at least 2 per axis");
  if (!(x_lo < x_hi) || !(y_lo < y_hi)) throw InvalidArgument("grid ranges must be non-degenerate");
}

double Grid2D::x_center(std::size_t i) const {
  const auto n = static_cast<double>(nx);
  const auto k = static_cast<double>(i);
  return ((2.0 * n - 2.0 * k - 1.0) * x_lo + (2.0 * k + 1.0) * x_hi) / (2.0 * n);
}

double Grid2D::y_center(std::size_t j) const {
  const auto n = static_cast<double>(ny);
  const auto k = static_cast<double>(j);
  return ((2.0 * n - 2.0 * k - 1.0) * y_lo + (2.0 * k + 1.0) * y_hi) / (2.0 * n);
}

Tensor Grid2D::centers() const {
  Tensor out = Tensor::matrix(cells(), 2);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      out(j * nx + i, 0) = x_center(i);
      out(j * nx + i, 1) = y_center(j);
    }
  }
  return out;
}

Grid2D parse_grid(std::string_view text) {
  auto values = parse_list(text);
  Grid2D g;
  if (values.size() == 3) {
    g.x_lo = g.y_lo = values[0];
    g.x_hi = g.y_hi = values[1];
    g.nx = g.ny = parse_count(format_number(values[2]));
  } else if (values.size() == 6) {
    g.x_lo = values[0];
    g.x_hi = values[1];
    g.y_lo = values[2];
    g.y_hi = values[3];
    g.nx = parse_count(format_number(values[4]));
    g.ny = parse_count(format_number(values[5]));
  } else {
    throw InvalidArgument("grid must be 'LO,HI,N' or 'XLO,XHI,YLO,YHI,NX,NY'");
  }
  g.validate();
  return g;
}

std::string to_string(const Grid2D& grid) {
  return format_number(grid.x_lo) + "," + format_number(grid.x_hi) + "," +
         format_number(grid.y_lo) + "," + format_number(grid.y_hi) + "," +
         std::to_string(grid.nx) + "," + std::to_string(grid.ny);
}

Tensor sample(const DistSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  if (n == 0) throw InvalidArgument("sample count must be at least 1");
  Tensor out = Tensor::matrix(n, spec.dim);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    auto row = out.row(k);
    switch (spec.kind) {
      case DistKind::loop:
      case DistKind::arc: {
        const double lo = spec.kind == DistKind::loop ? 0.0 : kArcStart;
        const double hi = spec.kind == DistKind::loop ? 2.0 * kPi : kArcEnd;
        const double angle = lo + (hi - lo) * unit(rng);
        const double radius = 1.0 + spec.noise * gauss(rng);
        row[0] = radius * std::cos(angle);
        row[1] = radius * std::sin(angle);
        break;
      }
      case DistKind::four_dot: {
        std::uniform_int_distribution<int> pick(0, 3);
        const auto& c = kDotCenters[pick(rng)];
        row[0] = c[0] + spec.noise * gauss(rng);
        row[1] = c[1] + spec.noise * gauss(rng);
        break;
      }
      case DistKind::gaussian:
        for (std::size_t d = 0; d < spec.dim; ++d) {
          row[d] = spec.mean[d] + std::sqrt(spec.variance[d]) * gauss(rng);
        }
        break;
      case DistKind::uniform:
        for (std::size_t d = 0; d < spec.dim; ++d) {
          row[d] = spec.lo[d] + (spec.hi[d] - spec.lo[d]) * unit(rng);
        }
        break;
    }
  }
  return out;
}

std::vector<double> density_on_grid(const DistSpec& spec, const Grid2D& grid) {
  spec.validate();
  grid.validate();
  if (spec.dim != 2) throw InvalidArgument("density_on_grid needs a 2-D distribution");
  std::vector<double> values(grid.cells());
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      values[j * grid.nx + i] = spec.density(grid.x_center(i), grid.y_center(j));
    }
  }
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericError("distribution " + to_string(spec) + " has no mass on the grid");
  }
  for (auto& v : values) v /= total;
  return values;
}

double manifold_distance(const DistSpec& shape, double x, double y) {
  shape.validate();
  switch (shape.kind) {
    case DistKind::loop:
      return std::abs(std::hypot(x, y) - 1.0);
    case DistKind::arc: {
      double angle = std::atan2(y, x);
      if (angle < kArcStart) angle += 2.0 * kPi;
      if (angle <= kArcEnd && (x != 0.0 || y != 0.0)) return std::abs(std::hypot(x, y) - 1.0);
      const double to_start = std::hypot(x - std::cos(kArcStart), y - std::sin(kArcStart));
      const double to_end = std::hypot(x - std::cos(kArcEnd), y - std::sin(kArcEnd));
      return std::min(to_start, to_end);
    }
    case DistKind::four_dot: {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : kDotCenters) best = std::min(best, std::hypot(x - c[0], y - c[1]));
      return best;
    }
    case DistKind::gaussian:
    case DistKind::uniform:
      break;
  }
  throw InvalidArgument("manifold distance needs a loop, arc or four-dot spec");
}

Tensor sample_outliers(const DistSpec& normal, const DistSpec& outlier, std::size_t n,
                       double margin, Rng& rng) {
  if (outlier.dim != 2) throw InvalidArgument("outliers are drawn in 2-D only");
  manifold_distance(normal, 0.0, 0.0);  // rejects non-shape specs
  if (n == 0) throw InvalidArgument("sample count must be at least 1");
  Tensor out = Tensor::matrix(n, 2);
  std::size_t kept = 0;
  const std::size_t budget = 1000 * n + 1000;
  for (std::size_t tries = 0; kept < n; ++tries) {
    if (tries >= budget) throw NumericError("outlier rejection accepted too few points");
    const Tensor draw = sample(outlier, 1, rng);
    if (manifold_distance(normal, draw[0], draw[1]) > margin) {
      out(kept, 0) = draw[0];
      out(kept, 1) = draw[1];
      ++kept;
    }
  }
  return out;
}

}  // namespace rcgan
