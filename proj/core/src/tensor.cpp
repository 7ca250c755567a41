#include "lungline/tensor.hpp"

#include <cmath>

#include "lungline/errors.hpp"

namespace lungline {

int64_t checked_numel(const std::vector<int>& dims) {
  if (dims.empty() || dims.size() > 4) {
    throw ShapeError("tensor rank must be 1..4, got " +
                     std::to_string(dims.size()));
  }
  int64_t n = 1;
  for (size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) {
      throw ShapeError("tensor extent " + std::to_string(i) +
                       " must be >= 1, got " + std::to_string(dims[i]));
    }
    n *= dims[i];
    if (n > (int64_t{1} << 40)) {
      throw ShapeError("tensor extent product is implausibly large");
    }
  }
  return n;
}

Tensor::Tensor(std::vector<int> dims) : dims_(std::move(dims)) {
  data_.assign(static_cast<size_t>(checked_numel(dims_)), 0.0f);
}

Tensor::Tensor(std::vector<int> dims, std::vector<float> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  const int64_t n = checked_numel(dims_);
  if (n != static_cast<int64_t>(data_.size())) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match extents " + shape_str());
  }
}

Tensor Tensor::full(std::vector<int> dims, float value) {
  Tensor t(std::move(dims));
  for (auto& v : t.data_) v = value;
  return t;
}

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::string s;
  for (size_t i = 0; i < dims_.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(dims_[i]);
  }
  return s;
}

}  // namespace lungline
