#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <vector>

#include "lemon/util/errors.hpp"

namespace lemon {

// Dense row-major tensor with shared storage. Copies are shallow; use clone()
// for a deep copy.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::int64_t> shape)
      : shape_(std::move(shape)),
        data_(std::make_shared<std::vector<T>>(static_cast<size_t>(count(shape_)), T(0))) {}

  Tensor(std::initializer_list<std::int64_t> shape)
      : Tensor(std::vector<std::int64_t>(shape)) {}

  static Tensor zeros(std::vector<std::int64_t> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<std::int64_t> shape, T v) {
    Tensor t(std::move(shape));
    for (auto& x : *t.data_) x = v;
    return t;
  }

  static Tensor scalar(T v) { return full({1}, v); }

  static Tensor from(std::vector<std::int64_t> shape, std::vector<T> values) {
    require(count(shape) == static_cast<std::int64_t>(values.size()),
            "tensor shape does not match value count");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<std::vector<T>>(std::move(values));
    return t;
  }

  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<std::vector<T>>(*data_);
    return t;
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> v(data_->size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<U>((*data_)[i]);
    return Tensor<U>::from(shape_, std::move(v));
  }

  bool defined() const { return data_ != nullptr; }
  std::int64_t rank() const { return static_cast<std::int64_t>(shape_.size()); }
  std::int64_t dim(std::int64_t i) const { return shape_[static_cast<size_t>(i)]; }
  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t numel() const { return data_ ? static_cast<std::int64_t>(data_->size()) : 0; }

  // 2-D helpers (most of the pipeline works on rows-x-cols matrices).
  std::int64_t rows() const { return rank() >= 1 ? dim(0) : 0; }
  std::int64_t cols() const { return rank() >= 2 ? dim(1) : 1; }

  T* data() { return data_->data(); }
  const T* data() const { return data_->data(); }

  T& operator[](std::int64_t i) { return (*data_)[static_cast<size_t>(i)]; }
  const T& operator[](std::int64_t i) const { return (*data_)[static_cast<size_t>(i)]; }

  T& at(std::int64_t r, std::int64_t c) { return (*data_)[static_cast<size_t>(r * cols() + c)]; }
  const T& at(std::int64_t r, std::int64_t c) const {
    return (*data_)[static_cast<size_t>(r * cols() + c)];
  }

  // Metadata-only reshape; element count must match.
  Tensor reshaped(std::vector<std::int64_t> shape) const {
    require(count(shape) == numel(), "reshape changes element count");
    Tensor t = *this;
    t.shape_ = std::move(shape);
    return t;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (const T& v : *data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  static std::int64_t count(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (auto d : shape) {
      require(d >= 0, "negative tensor dimension");
      n *= d;
    }
    return n;
  }

 private:
  std::vector<std::int64_t> shape_;
  std::shared_ptr<std::vector<T>> data_;
};

}  // namespace lemon
