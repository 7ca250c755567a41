#ifndef LUNGLINE_TENSOR_HPP
#define LUNGLINE_TENSOR_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lungline {

// Dense rank-1..4 float32 array, row-major. Activations are N,C,H,W;
// convolution weights are O,I,Kh,Kw. The buffer length always equals the
// product of the extents and every extent is >= 1.
class Tensor {
public:
  Tensor() = default;

  // Zero-filled tensor of the given extents.
  explicit Tensor(std::vector<int> dims);

  Tensor(std::vector<int> dims, std::vector<float> data);

  static Tensor full(std::vector<int> dims, float value);

  int rank() const { return static_cast<int>(dims_.size()); }
  int dim(int i) const { return dims_[static_cast<size_t>(i)]; }
  const std::vector<int>& dims() const { return dims_; }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  float* ptr() { return data_.data(); }
  const float* ptr() const { return data_.data(); }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }
  bool all_finite() const;
  std::string shape_str() const;  // e.g. "2x3x224x224"

  bool operator==(const Tensor& other) const {
    return dims_ == other.dims_ && data_ == other.data_;
  }

private:
  std::vector<int> dims_;
  std::vector<float> data_;
};

// Product of extents after validating rank and positivity.
int64_t checked_numel(const std::vector<int>& dims);

}  // namespace lungline

#endif  // LUNGLINE_TENSOR_HPP
