#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rcgan/distributions.hpp"
#include "rcgan/errors.hpp"

namespace rcgan::theory {

// Discrete normal-data mass q and penalty mass t over a finite cell set.
// The encoder conditional is folded into the cell measure.
struct JointGrid {
  std::vector<double> q;
  std::vector<double> t;

  std::size_t cells() const { return q.size(); }
  // Nonnegative, finite, equal length, each summing to 1 within 1e-12.
  void validate() const;
};

struct BetaSolution {
  double beta = 0.0;
  std::vector<std::size_t> support;  // cells with beta*q - t >= 0 (q = t = 0 cells excluded)
  std::vector<double> p;             // max(0, beta*q - t)

  // KKT bookkeeping: lambda = log(1 + 1/beta) is the multiplier of the
  // sum-to-one constraint. On the support `stationarity` holds
  // log((t+p)/(t+p+q)) + lambda, which vanishes at the optimum; off the
  // support `multiplier` holds mu = log(t/(t+q)) + lambda, which must be >= 0.
  double lambda = 0.0;
  std::vector<double> stationarity;
  std::vector<double> multiplier;
};

// q/(q+t+p) per cell; nullopt where q+t+p == 0.
std::vector<std::optional<double>> optimal_discriminator(std::span<const double> q,
                                                         std::span<const double> t,
                                                         std::span<const double> p);

// 2 KL((t+p)/2 || s/3) + KL(q || s/3) - log(27/4), s = q+t+p, with 0 log 0 = 0.
double objective_c(std::span<const double> q, std::span<const double> t,
                   std::span<const double> p);

// sum_i max(0, beta*q_i - t_i).
double positive_part_mass(std::span<const double> q, std::span<const double> t, double beta);

// Bisection of positive_part_mass(beta) = 1 on [1, 2], to bracket width `tol`.
BetaSolution solve_beta(const JointGrid& grid, double tol = 1e-12);

// Same root found exactly by sorting the breakpoints t_i/q_i.
BetaSolution solve_beta_breakpoints(const JointGrid& grid);

// Raised by the projected-gradient oracle when it runs out of iterations.
class NonConvergence : public NumericError {
 public:
  NonConvergence(const std::string& what, std::vector<double> last)
      : NumericError(what), last_iterate(std::move(last)) {}
  std::vector<double> last_iterate;
};

// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> v);

// Minimises objective_c over the simplex by projected gradient descent with
// backtracking, starting from the uniform distribution. `step` is the initial
// step size. Independent of the closed form; meant for verification.
std::vector<double> oracle_minimize_c(const JointGrid& grid, std::size_t iters = 200000,
                                      double step = 1.0);

struct Fig2Result {
  Grid2D grid;
  std::vector<double> q, t, p;
  double beta = 0.0;
};

// Discretises q and t on `grid` and computes the optimal generator mass.
Fig2Result fig2_demo(const DistSpec& q_spec, const DistSpec& t_spec, const Grid2D& grid);

}  // namespace rcgan::theory
