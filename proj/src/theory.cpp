#include "rcgan/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rcgan::theory {

namespace {

void check_lengths(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c) throw DimensionError("q, t and p must have the same number of cells");
}

void check_mass(std::span<const double> values, const char* name) {
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidArgument(std::string(name) + " must be finite and nonnegative");
    }
  }
}

double xlogy_ratio(double x, double y) { return x > 0.0 ? x * std::log(x / y) : 0.0; }

BetaSolution finish(const JointGrid& grid, double beta) {
  BetaSolution sol;
  sol.beta = beta;
  sol.lambda = std::log1p(1.0 / beta);
  const std::size_t n = grid.cells();
  sol.p.assign(n, 0.0);
  sol.stationarity.assign(n, 0.0);
  sol.multiplier.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = grid.q[i];
    const double t = grid.t[i];
    if (q == 0.0 && t == 0.0) continue;
    const double excess = beta * q - t;
    if (excess >= 0.0) {
      sol.support.push_back(i);
      sol.p[i] = excess;
      const double tp = t + excess;
      if (tp > 0.0) sol.stationarity[i] = std::log(tp / (tp + q)) + sol.lambda;
    } else {
      sol.multiplier[i] = std::log(t / (t + q)) + sol.lambda;
    }
  }
  return sol;
}

}  // namespace

void JointGrid::validate() const {
  if (q.empty()) throw InvalidArgument("joint grid has no cells");
  if (q.size() != t.size()) throw DimensionError("q and t must have the same number of cells");
  check_mass(q, "q");
  check_mass(t, "t");
  const double sq = std::accumulate(q.begin(), q.end(), 0.0);
  const double st = std::accumulate(t.begin(), t.end(), 0.0);
  if (sq == 0.0) throw NumericError("infeasible grid: q has no mass");
  if (std::abs(sq - 1.0) > 1e-12) throw InvalidArgument("q must sum to 1");
  if (std::abs(st - 1.0) > 1e-12) throw InvalidArgument("t must sum to 1");
}

std::vector<std::optional<double>> optimal_discriminator(std::span<const double> q,
                                                         std::span<const double> t,
                                                         std::span<const double> p) {
  check_lengths(q.size(), t.size(), p.size());
  check_mass(q, "q");
  check_mass(t, "t");
  check_mass(p, "p");
  std::vector<std::optional<double>> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double s = q[i] + t[i] + p[i];
    if (s > 0.0) out[i] = q[i] / s;
  }
  return out;
}

double objective_c(std::span<const double> q, std::span<const double> t,
                   std::span<const double> p) {
  check_lengths(q.size(), t.size(), p.size());
  double kl_penalty = 0.0;
  double kl_normal = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double third = (q[i] + t[i] + p[i]) / 3.0;
    kl_penalty += xlogy_ratio(0.5 * (t[i] + p[i]), third);
    kl_normal += xlogy_ratio(q[i], third);
  }
  return 2.0 * kl_penalty + kl_normal - std::log(27.0 / 4.0);
}

double positive_part_mass(std::span<const double> q, std::span<const double> t, double beta) {
  if (q.size() != t.size()) throw DimensionError("q and t must have the same number of cells");
  if (beta < 0.0) throw InvalidArgument("beta must be nonnegative");
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) total += std::max(0.0, beta * q[i] - t[i]);
  return total;
}

BetaSolution solve_beta(const JointGrid& grid, double tol) {
  grid.validate();
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  double lo = 1.0;
  double hi = 2.0;
  // Disjoint supports give S(1) = 1 up to the rounding of sum q.
  if (positive_part_mass(grid.q, grid.t, lo) >= 1.0 - 1e-12) return finish(grid, lo);
  if (positive_part_mass(grid.q, grid.t, hi) < 1.0 - 1e-9) {
    throw NumericError("positive-part mass at beta = 2 is below one; grid is not normalised");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (positive_part_mass(grid.q, grid.t, mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return finish(grid, 0.5 * (lo + hi));
}

BetaSolution solve_beta_breakpoints(const JointGrid& grid) {
  grid.validate();
  if (positive_part_mass(grid.q, grid.t, 1.0) >= 1.0 - 1e-12) return finish(grid, 1.0);
  struct Cell {
    double ratio, q, t;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    if (grid.q[i] > 0.0) cells.push_back({grid.t[i] / grid.q[i], grid.q[i], grid.t[i]});
  }
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return a.ratio < b.ratio; });

  // On [r_k, r_{k+1}] the positive-part mass is beta*Q_k - T_k.
  double q_sum = 0.0;
  double t_sum = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    q_sum += cells[k].q;
    t_sum += cells[k].t;
    const bool last = k + 1 == cells.size();
    if (last || cells[k + 1].ratio * q_sum - t_sum >= 1.0) {
      const double beta = (1.0 + t_sum) / q_sum;
      return finish(grid, std::clamp(beta, 1.0, 2.0));
    }
  }
  throw NumericError("infeasible grid: q has no mass");
}

std::vector<double> project_to_simplex(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("cannot project an empty vector");
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

std::vector<double> oracle_minimize_c(const JointGrid& grid, std::size_t iters, double step) {
  grid.validate();
  if (!(step > 0.0)) throw InvalidArgument("step must be positive");
  const std::size_t n = grid.cells();
  const auto& q = grid.q;
  const auto& t = grid.t;
  constexpr double kFloor = 1e-300;
  // Objective rounding (~1e-16) stops certified progress around a gap of
  // 1e-7 on badly scaled grids; 1e-6 is reached reliably.
  constexpr double kGapTol = 1e-6;
  constexpr double kArmijo = 1e-4;

  std::vector<double> p(n, 1.0 / static_cast<double>(n));
  double value = objective_c(q, t, p);
  std::vector<double> gradient(n);
  std::vector<double> trial(n);

  // dC/dp_i = log((t_i + p_i) / s_i)
  auto compute_gradient = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      const double tp = t[i] + p[i];
      const double s = tp + q[i];
      gradient[i] = s > 0.0 ? std::log(std::max(tp, kFloor) / s) : 0.0;
    }
  };
  // Frank-Wolfe gap <grad, p> - min_i grad_i. C is convex, so the gap bounds
  // C(p) - min C from above.
  auto duality_gap = [&] {
    double inner = 0.0;
    double lowest = gradient[0];
    for (std::size_t i = 0; i < n; ++i) {
      inner += gradient[i] * p[i];
      lowest = std::min(lowest, gradient[i]);
    }
    return inner - lowest;
  };

  compute_gradient();
  for (std::size_t it = 0; it < iters; ++it) {
    if (duality_gap() < kGapTol) return p;
    std::vector<double> candidate;
    double candidate_value = 0.0;
    bool accepted = false;
    for (; step >= 1e-14; step *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = p[i] - step * gradient[i];
      candidate = project_to_simplex(trial);
      candidate_value = objective_c(q, t, candidate);
      // Armijo rule along the projection arc. The slope is unbounded where
      // t = 0 and p -> 0, so a quadratic upper bound cannot be relied on.
      double linear = 0.0;
      for (std::size_t i = 0; i < n; ++i) linear += gradient[i] * (candidate[i] - p[i]);
      if (candidate_value <= value + kArmijo * linear + 1e-15) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no certified decrease left
    p = std::move(candidate);
    value = candidate_value;
    compute_gradient();
    step = std::min(step * 2.0, 1e6);
  }
  throw NonConvergence("projected gradient stopped before reaching a duality gap of 1e-6", p);
}

Fig2Result fig2_demo(const DistSpec& q_spec, const DistSpec& t_spec, const Grid2D& grid) {
  if (q_spec.dim != 2 || t_spec.dim != 2) throw InvalidArgument("fig2_demo needs 2-D specs");
  Fig2Result result;
  result.grid = grid;
  result.q = density_on_grid(q_spec, grid);
  result.t = density_on_grid(t_spec, grid);
  auto sol = solve_beta(JointGrid{result.q, result.t});
  result.p = std::move(sol.p);
  result.beta = sol.beta;
  return result;
}

}  // namespace rcgan::theory
