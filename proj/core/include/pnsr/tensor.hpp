#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace pnsr {

/// Dense row-major tensor of doubles. Feature maps are (channels, height,
/// width); convolution kernels are (out_channels, in_channels, k, k).
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::initializer_list<int> shape, double fill = 0.0);
  explicit Tensor(std::vector<int> shape, double fill = 0.0);

  const std::vector<int>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  int dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Element (c, y, x) of a rank-3 tensor.
  double& at(int c, int y, int x) noexcept {
    return data_[(static_cast<std::size_t>(c) * static_cast<std::size_t>(shape_[1]) + static_cast<std::size_t>(y)) *
                     static_cast<std::size_t>(shape_[2]) + static_cast<std::size_t>(x)];
  }
  double at(int c, int y, int x) const noexcept {
    return data_[(static_cast<std::size_t>(c) * static_cast<std::size_t>(shape_[1]) + static_cast<std::size_t>(y)) *
                     static_cast<std::size_t>(shape_[2]) + static_cast<std::size_t>(x)];
  }

  void fill(double value);
  bool all_finite() const noexcept;
  std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

}  // namespace pnsr
