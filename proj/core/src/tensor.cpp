#include "pnsr/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "pnsr/error.hpp"

namespace pnsr {

Tensor::Tensor(std::initializer_list<int> shape, double fill)
    : Tensor(std::vector<int>(shape), fill) {}

Tensor::Tensor(std::vector<int> shape, double fill) : shape_(std::move(shape)) {
  std::size_t n = 1;
  for (int d : shape_) {
    if (d < 0) throw ArgumentError("tensor: negative dimension");
    n *= static_cast<std::size_t>(d);
  }
  data_.assign(n, fill);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape_[i]);
  }
  return s + ")";
}

}  // namespace pnsr
