#include "rcgan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "rcgan/errors.hpp"

namespace rcgan {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one extent");
  for (auto extent : shape) {
    if (extent == 0) throw DimensionError("tensor extents must be positive");
  }
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (data_.size() != element_count(shape_)) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape");
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 1) return 1;
  if (shape_.size() != 2) throw DimensionError("rows() needs a rank-1 or rank-2 tensor");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.size() == 1) return shape_[0];
  if (shape_.size() != 2) throw DimensionError("cols() needs a rank-1 or rank-2 tensor");
  return shape_[1];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row counts differ (" + std::to_string(a.rows()) +
                         " vs " + std::to_string(b.rows()) + ")");
  }
  const std::size_t ca = a.cols();
  const std::size_t cb = b.cols();
  Tensor out = Tensor::matrix(a.rows(), ca + cb);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row(r);
    std::copy_n(a.row(r).begin(), ca, dst.begin());
    std::copy_n(b.row(r).begin(), cb, dst.begin() + static_cast<std::ptrdiff_t>(ca));
  }
  return out;
}

std::pair<Tensor, Tensor> split_cols(const Tensor& t, std::size_t at) {
  const std::size_t c = t.cols();
  if (at == 0 || at >= c) throw DimensionError("split_cols: split point out of range");
  Tensor left = Tensor::matrix(t.rows(), at);
  Tensor right = Tensor::matrix(t.rows(), c - at);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto src = t.row(r);
    std::copy_n(src.begin(), at, left.row(r).begin());
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(at), src.end(), right.row(r).begin());
  }
  return {std::move(left), std::move(right)};
}

Tensor gather_rows(const Tensor& t, std::span<const std::size_t> indices) {
  if (indices.empty()) throw DimensionError("gather_rows: no rows selected");
  const std::size_t c = t.cols();
  Tensor out = Tensor::matrix(indices.size(), c);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= t.rows()) throw DimensionError("gather_rows: index out of range");
    auto src = t.row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace rcgan
