/* Copyright 2026 The winowise Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "winowise/dyadic.hpp"
#include "winowise/errors.hpp"

namespace winowise {

using Shape = std::vector<std::int64_t>;

// NCHW also carries 4-D weights (C_out, C_in, kH, kW).
// FRACTAL is <N, C1, H, W, C0> with C0 == 32.
// WINO_TAPS is taps-major <tap, N, C1, tileH, tileW, C0>.
enum class Layout { kNCHW, kFractal, kMatrix, kWinoTaps };
enum class DType { kF64, kI8, kI16, kI32, kRational };

inline constexpr std::int64_t kFractalC0 = 32;

std::string_view to_string(Layout layout);
std::string_view to_string(DType dtype);
Layout parse_layout(std::string_view name);
DType parse_dtype(std::string_view name);
std::size_t element_size(DType dtype);

template <class T>
struct DTypeOf;
template <>
struct DTypeOf<double> {
  static constexpr DType value = DType::kF64;
};
template <>
struct DTypeOf<std::int8_t> {
  static constexpr DType value = DType::kI8;
};
template <>
struct DTypeOf<std::int16_t> {
  static constexpr DType value = DType::kI16;
};
template <>
struct DTypeOf<std::int32_t> {
  static constexpr DType value = DType::kI32;
};
template <>
struct DTypeOf<Dyadic> {
  static constexpr DType value = DType::kRational;
};

std::int64_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Immutable n-dimensional container. Element order is row-major over the
// declared shape. Safe to share between concurrent readers.
class Tensor {
 public:
  using Storage =
      std::variant<std::vector<double>, std::vector<std::int8_t>,
                   std::vector<std::int16_t>, std::vector<std::int32_t>,
                   std::vector<Dyadic>>;

  Tensor() = default;
  Tensor(Shape shape, Layout layout, Storage data);

  template <class T>
  static Tensor zeros(Shape shape, Layout layout) {
    const auto n = shape_numel(shape);
    return Tensor(std::move(shape), layout, std::vector<T>(n, T{}));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::int64_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t rank() const noexcept { return shape_.size(); }
  Layout layout() const noexcept { return layout_; }
  DType dtype() const noexcept { return static_cast<DType>(data_.index()); }
  std::int64_t numel() const noexcept { return numel_; }
  const Storage& storage() const noexcept { return data_; }

  template <class T>
  std::span<const T> values() const {
    const auto* v = std::get_if<std::vector<T>>(&data_);
    if (v == nullptr) {
      throw ShapeError("tensor dtype is " + std::string(to_string(dtype())) +
                       ", requested " +
                       std::string(to_string(DTypeOf<T>::value)));
    }
    return {v->data(), v->size()};
  }

  // Flat row-major offset of a multi-index.
  std::int64_t offset(std::initializer_list<std::int64_t> index) const;

  template <class T>
  const T& at(std::initializer_list<std::int64_t> index) const {
    return values<T>()[static_cast<std::size_t>(offset(index))];
  }

  // Element converted to double regardless of dtype.
  double as_double(std::int64_t flat) const;
  // Element converted to an exact dyadic; throws for f64 values that are
  // not exactly representable.
  Dyadic as_dyadic(std::int64_t flat) const;

  std::vector<double> to_f64_vector() const;
  Tensor with_layout(Layout layout) const;

  friend bool operator==(const Tensor& a, const Tensor& b);

 private:
  void check_invariants() const;

  Shape shape_;
  Layout layout_ = Layout::kNCHW;
  Storage data_;
  std::int64_t numel_ = 0;
};

// Converts a tensor of any dtype into f64.
Tensor to_f64(const Tensor& t);

}  // namespace winowise
