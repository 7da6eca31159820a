#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace traffnet::ad {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major array of 64-bit floats. Rank 1 is a vector, rank 2 a
/// matrix; a scalar is the one-element vector {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor vector(std::vector<double> values);
  static Tensor scalar(double value);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t rank() const noexcept { return shape_.size(); }
  bool is_scalar() const noexcept { return rank() == 1 && values_.size() == 1; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(std::size_t row, std::size_t col) const { return values_[row * shape_[1] + col]; }

  bool requires_grad() const noexcept { return requires_grad_; }
  void set_requires_grad(bool flag) noexcept { requires_grad_ = flag; }

  bool all_finite() const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> values_;
  bool requires_grad_ = false;
};

/// A named learnable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  std::vector<double> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v);

  void zero_grad();
};

}  // namespace traffnet::ad
