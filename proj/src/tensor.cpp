#include "cwrs/tensor.hpp"

#include <cmath>
#include <sstream>

#include "cwrs/errors.hpp"

namespace cwrs {

size_t shape_numel(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeMismatch("non-positive dimension in shape");
    n *= static_cast<size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(shape_numel(shape_), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_numel(shape_))
    throw ShapeMismatch("data length does not match shape " + shape_str());
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.data_.assign(1, v);
  return t;
}

Tensor Tensor::vec(std::initializer_list<double> v) {
  Tensor t;
  t.shape_ = {static_cast<int>(v.size())};
  t.data_.assign(v.begin(), v.end());
  return t;
}

Tensor Tensor::from_vector(const std::vector<double>& v) {
  Tensor t;
  t.shape_ = {static_cast<int>(v.size())};
  t.data_ = v;
  return t;
}

Tensor Tensor::full(std::vector<int> shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::reshaped(std::vector<int> shape) const {
  if (shape_numel(shape) != data_.size())
    throw ShapeMismatch("reshape " + shape_str() + " to incompatible element count");
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

double Tensor::scalar_value() const {
  if (data_.size() != 1) throw ShapeMismatch("scalar_value on tensor " + shape_str());
  return data_[0];
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
  os << ")";
  return os.str();
}

}  // namespace cwrs
