#include "rcgan/grid_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "rcgan/errors.hpp"

namespace rcgan {

namespace {

void check_size(const Grid2D& grid, std::span<const double> values) {
  if (values.size() != grid.cells()) {
    throw DimensionError("grid has " + std::to_string(grid.cells()) + " cells but " +
                         std::to_string(values.size()) + " values were given");
  }
}

}  // namespace

void write_grid_csv(const std::filesystem::path& path, const Grid2D& grid,
                    std::span<const double> values) {
  check_size(grid, values);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  char buf[64];
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      if (i) out << ',';
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), values[j * grid.nx + i]);
      out.write(buf, end - buf);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<double> read_grid_csv(const std::filesystem::path& path, std::size_t& nx,
                                  std::size_t& ny) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  nx = 0;
  ny = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t count = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc()) {
        throw FormatError(path.string() + ":" + std::to_string(ny + 1) + ": bad value '" +
                          cell + "'");
      }
      values.push_back(v);
      ++count;
    }
    if (nx == 0) nx = count;
    if (count != nx) {
      throw FormatError(path.string() + ":" + std::to_string(ny + 1) + ": ragged row");
    }
    ++ny;
  }
  return values;
}

void write_grid_pgm(const std::filesystem::path& path, const Grid2D& grid,
                    std::span<const double> values, double lo, double hi) {
  check_size(grid, values);
  if (lo == hi) {
    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
  }
  const double range = hi > lo ? hi - lo : 1.0;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << grid.nx << ' ' << grid.ny << "\n255\n";
  for (std::size_t r = 0; r < grid.ny; ++r) {
    const std::size_t j = grid.ny - 1 - r;
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double u = std::clamp((values[j * grid.nx + i] - lo) / range, 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(u * 255.0))));
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace rcgan
