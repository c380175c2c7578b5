#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rcgan/random.hpp"
#include "rcgan/tensor.hpp"

namespace rcgan {

enum class DistKind { loop, arc, four_dot, gaussian, uniform };

// A sampling/density recipe for normal data q(x), penalty t(x) or the latent
// prior p(z).
//
// Synthetic 2-D shapes:
//   loop      unit circle, radial gaussian noise (default sd 0.1)
//   arc       240 degree segment of the same circle, open at the bottom
//   four-dot  equal mixture of gaussians at (+-1, +-1), default sd 0.15
// General:
//   gaussian  diagonal covariance, any dimension
//   uniform   axis-aligned box, any dimension
//
// Text form (CLI and config files):
//   loop[:NOISE]  arc[:NOISE]  four-dot[:NOISE]
//   gaussian:M1,M2,...:V1,V2,...     (mean list, variance list)
//   normal:DIM:VAR                   (zero-mean isotropic shorthand)
//   uniform:LO1,LO2,...:HI1,HI2,...
//   box:DIM:LO:HI                    (same bounds on every axis)
struct DistSpec {
  DistKind kind = DistKind::gaussian;
  std::size_t dim = 2;
  double noise = 0.0;              // shape noise sd (loop/arc/four-dot)
  std::vector<double> mean;        // gaussian
  std::vector<double> variance;    // gaussian, diagonal
  std::vector<double> lo, hi;      // uniform

  static DistSpec loop(double noise = 0.1);
  static DistSpec arc(double noise = 0.1);
  static DistSpec four_dot(double noise = 0.15);
  static DistSpec gaussian(std::vector<double> mean, std::vector<double> variance);
  static DistSpec standard_normal(std::size_t dim, double variance = 1.0);
  static DistSpec uniform(std::vector<double> lo, std::vector<double> hi);
  static DistSpec box(std::size_t dim, double lo, double hi);

  // Throws InvalidArgument when a field invariant does not hold.
  void validate() const;

  // Unnormalised density at a 2-D point. Only meaningful when dim == 2.
  double density(double x, double y) const;

  friend bool operator==(const DistSpec&, const DistSpec&) = default;
};

DistSpec parse_dist_spec(std::string_view text);
std::string to_string(const DistSpec& spec);

// Evaluation window over [x_lo, x_hi] x [y_lo, y_hi] with nx * ny cells.
// Cell values are stored row-major: row j runs along x at the j-th y center
// (row 0 is the lowest y).
struct Grid2D {
  double x_lo = -3.0, x_hi = 3.0;
  double y_lo = -3.0, y_hi = 3.0;
  std::size_t nx = 64, ny = 64;

  void validate() const;
  std::size_t cells() const { return nx * ny; }
  // Computed so that a window symmetric about 0 yields centers that are exact
  // negatives of each other.
  double x_center(std::size_t i) const;
  double y_center(std::size_t j) const;
  // [cells x 2] matrix of (x, y) centers in storage order.
  Tensor centers() const;

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

// "XLO,XHI,YLO,YHI,NX,NY" or "LO,HI,N" for a square window.
Grid2D parse_grid(std::string_view text);
std::string to_string(const Grid2D& grid);

// n i.i.d. draws, one per row.
Tensor sample(const DistSpec& spec, std::size_t n, Rng& rng);

// Density at every cell center, renormalised to sum to one.
std::vector<double> density_on_grid(const DistSpec& spec, const Grid2D& grid);

// Distance from a 2-D point to the noiseless shape: the unit circle, the arc
// segment, or the nearest dot center. Loop, arc and four-dot only.
double manifold_distance(const DistSpec& shape, double x, double y);

// n draws from `outlier`, keeping only points more than `margin` away from
// the shape of `normal`. Throws NumericError if acceptance is hopeless.
Tensor sample_outliers(const DistSpec& normal, const DistSpec& outlier, std::size_t n,
                       double margin, Rng& rng);

}  // namespace rcgan
