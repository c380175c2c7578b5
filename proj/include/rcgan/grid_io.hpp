#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "rcgan/distributions.hpp"

namespace rcgan {

// One CSV line per grid row (ny lines of nx comma-separated values), values
// printed in shortest round-trip form.
void write_grid_csv(const std::filesystem::path& path, const Grid2D& grid,
                    std::span<const double> values);
std::vector<double> read_grid_csv(const std::filesystem::path& path, std::size_t& nx,
                                  std::size_t& ny);

// 8-bit binary PGM. Values are mapped linearly from [lo, hi] to [0, 255];
// when lo == hi the range is taken from the data. The top image row is the
// highest y.
void write_grid_pgm(const std::filesystem::path& path, const Grid2D& grid,
                    std::span<const double> values, double lo = 0.0, double hi = 0.0);

}  // namespace rcgan
