#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace coheval::diff {

// Dense row-major tensor of 64-bit floats. Rank is almost always 0 (scalar),
// 1 (vector) or 2 (matrix) in this codebase.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count(shape_), 0.0) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_)) {
      throw std::invalid_argument("Tensor: data length does not match shape");
    }
  }

  static Tensor scalar(double v) { return Tensor({}, {v}); }

  static Tensor vector(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({n}, std::move(v));
  }

  static Tensor zeros(std::vector<std::size_t> shape) {
    return Tensor(std::move(shape));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  std::size_t rows() const {
    require_rank(2, "rows");
    return shape_[0];
  }
  std::size_t cols() const {
    require_rank(2, "cols");
    return shape_[1];
  }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t r, std::size_t c) {
    require_rank(2, "at");
    return data_[r * shape_[1] + c];
  }
  double at(std::size_t r, std::size_t c) const {
    require_rank(2, "at");
    return data_[r * shape_[1] + c];
  }

  double item() const {
    if (data_.size() != 1) {
      throw std::logic_error("Tensor::item: tensor has " +
                             std::to_string(data_.size()) + " elements");
    }
    return data_[0];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool all_finite() const;

  // Squared L2 norm over all entries.
  double squared_norm() const;

 private:
  static std::size_t count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
  }

  void require_rank(std::size_t r, const char* what) const {
    if (shape_.size() != r) {
      throw std::logic_error(std::string("Tensor::") + what +
                             ": expected rank " + std::to_string(r));
    }
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace coheval::diff
