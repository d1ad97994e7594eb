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

#include "winowise/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace winowise {

namespace {

int count_trailing_zeros(std::uint64_t v) { return std::countr_zero(v); }

}  // namespace

Dyadic::Dyadic(std::int64_t num, std::int64_t exp) : num_(num), exp_(exp) {
  if (num_ == 0) {
    exp_ = 0;
    return;
  }
  if (exp_ < 0) {
    const auto shift = -exp_;
    if (shift >= 63 || std::abs(num_) > (std::numeric_limits<std::int64_t>::max() >> shift)) {
      throw OverflowError("dyadic numerator overflow");
    }
    num_ *= (std::int64_t{1} << shift);
    exp_ = 0;
    return;
  }
  const int tz = count_trailing_zeros(static_cast<std::uint64_t>(num_));
  const auto drop = std::min<std::int64_t>(tz, exp_);
  num_ >>= drop;  // arithmetic shift is exact: low bits are zero
  exp_ -= drop;
}

double Dyadic::to_double() const noexcept {
  return std::ldexp(static_cast<double>(num_), -static_cast<int>(exp_));
}

std::string Dyadic::to_string() const {
  if (exp_ == 0) return std::to_string(num_);
  return std::to_string(num_) + "/2^" + std::to_string(exp_);
}

namespace {

// Brings both operands to the larger exponent. Returns false on overflow.
bool align(const Dyadic& a, const Dyadic& b, __int128& an, __int128& bn,
           std::int64_t& e) {
  e = std::max(a.exp(), b.exp());
  const auto sa = e - a.exp();
  const auto sb = e - b.exp();
  if (sa > 62 || sb > 62) return false;
  an = static_cast<__int128>(a.num()) << sa;
  bn = static_cast<__int128>(b.num()) << sb;
  return true;
}

Dyadic from_wide(__int128 num, std::int64_t exp) {
  while (exp > 0 && (num & 1) == 0 && num != 0) {
    num >>= 1;
    --exp;
  }
  if (num > std::numeric_limits<std::int64_t>::max() ||
      num < std::numeric_limits<std::int64_t>::min()) {
    throw OverflowError("dyadic numerator overflow");
  }
  return Dyadic(static_cast<std::int64_t>(num), exp);
}

}  // namespace

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
  __int128 an, bn;
  std::int64_t e;
  if (!align(a, b, an, bn, e)) throw OverflowError("dyadic exponent gap too large");
  return from_wide(an + bn, e);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
  return from_wide(static_cast<__int128>(a.num()) * b.num(), a.exp() + b.exp());
}

Dyadic Dyadic::operator-() const {
  if (num_ == std::numeric_limits<std::int64_t>::min()) {
    throw OverflowError("dyadic negation overflow");
  }
  return Dyadic(-num_, exp_);
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
  __int128 an, bn;
  std::int64_t e;
  if (!align(a, b, an, bn, e)) {
    // Exponents far apart: fall back to double, exact enough to order.
    const double da = a.to_double(), db = b.to_double();
    if (da < db) return std::strong_ordering::less;
    if (da > db) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  if (an < bn) return std::strong_ordering::less;
  if (an > bn) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string_view to_string(Layout layout) {
  switch (layout) {
    case Layout::kNCHW: return "NCHW";
    case Layout::kFractal: return "FRACTAL";
    case Layout::kMatrix: return "MATRIX";
    case Layout::kWinoTaps: return "WINO_TAPS";
  }
  return "?";
}

std::string_view to_string(DType dtype) {
  switch (dtype) {
    case DType::kF64: return "f64";
    case DType::kI8: return "i8";
    case DType::kI16: return "i16";
    case DType::kI32: return "i32";
    case DType::kRational: return "rational";
  }
  return "?";
}

Layout parse_layout(std::string_view name) {
  for (auto l : {Layout::kNCHW, Layout::kFractal, Layout::kMatrix, Layout::kWinoTaps}) {
    if (to_string(l) == name) return l;
  }
  throw ShapeError("unknown layout '" + std::string(name) + "'");
}

DType parse_dtype(std::string_view name) {
  for (auto d : {DType::kF64, DType::kI8, DType::kI16, DType::kI32, DType::kRational}) {
    if (to_string(d) == name) return d;
  }
  throw ShapeError("unknown dtype '" + std::string(name) + "'");
}

std::size_t element_size(DType dtype) {
  switch (dtype) {
    case DType::kF64: return 8;
    case DType::kI8: return 1;
    case DType::kI16: return 2;
    case DType::kI32: return 4;
    case DType::kRational: return 16;
  }
  return 0;
}

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw ShapeError("negative extent in shape " + shape_to_string(shape));
    if (d != 0 && n > std::numeric_limits<std::int64_t>::max() / d) {
      throw ShapeError("shape too large: " + shape_to_string(shape));
    }
    n *= d;
  }
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, Layout layout, Storage data)
    : shape_(std::move(shape)), layout_(layout), data_(std::move(data)) {
  numel_ = shape_numel(shape_);
  check_invariants();
}

void Tensor::check_invariants() const {
  const auto stored = std::visit([](const auto& v) { return static_cast<std::int64_t>(v.size()); }, data_);
  if (stored != numel_) {
    throw ShapeError("shape " + shape_to_string(shape_) + " implies " +
                     std::to_string(numel_) + " elements, got " + std::to_string(stored));
  }
  switch (layout_) {
    case Layout::kFractal:
      if (shape_.size() != 5 || shape_[4] != kFractalC0) {
        throw ShapeError("FRACTAL layout needs <N,C1,H,W,32>, got " + shape_to_string(shape_));
      }
      break;
    case Layout::kMatrix:
      if (shape_.size() != 2) throw ShapeError("MATRIX layout needs 2 dims, got " + shape_to_string(shape_));
      break;
    case Layout::kWinoTaps:
      if (shape_.size() != 6 || shape_[5] != kFractalC0) {
        throw ShapeError("WINO_TAPS layout needs <tap,N,C1,tH,tW,32>, got " + shape_to_string(shape_));
      }
      break;
    case Layout::kNCHW:
      if (shape_.size() != 4) throw ShapeError("NCHW layout needs 4 dims, got " + shape_to_string(shape_));
      break;
  }
}

std::int64_t Tensor::offset(std::initializer_list<std::int64_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("index rank " + std::to_string(index.size()) + " != tensor rank " +
                     std::to_string(shape_.size()));
  }
  std::int64_t off = 0;
  std::size_t d = 0;
  for (auto i : index) {
    if (i < 0 || i >= shape_[d]) throw ShapeError("index out of range");
    off = off * shape_[d] + i;
    ++d;
  }
  return off;
}

double Tensor::as_double(std::int64_t flat) const {
  const auto i = static_cast<std::size_t>(flat);
  return std::visit(
      [i](const auto& v) -> double {
        using T = typename std::decay_t<decltype(v)>::value_type;
        if constexpr (std::is_same_v<T, Dyadic>) {
          return v[i].to_double();
        } else {
          return static_cast<double>(v[i]);
        }
      },
      data_);
}

Dyadic Tensor::as_dyadic(std::int64_t flat) const {
  const auto i = static_cast<std::size_t>(flat);
  return std::visit(
      [i](const auto& v) -> Dyadic {
        using T = typename std::decay_t<decltype(v)>::value_type;
        if constexpr (std::is_same_v<T, Dyadic>) {
          return v[i];
        } else if constexpr (std::is_same_v<T, double>) {
          const double x = v[i];
          if (!std::isfinite(x)) throw DomainError("non-finite value has no dyadic form");
          int e = 0;
          const double mant = std::frexp(x, &e);
          // x = mant * 2^e with 53 significant bits.
          const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
          return Dyadic(scaled, 53 - static_cast<std::int64_t>(e));
        } else {
          return Dyadic(static_cast<std::int64_t>(v[i]));
        }
      },
      data_);
}

std::vector<double> Tensor::to_f64_vector() const {
  std::vector<double> out(static_cast<std::size_t>(numel_));
  for (std::int64_t i = 0; i < numel_; ++i) out[static_cast<std::size_t>(i)] = as_double(i);
  return out;
}

Tensor Tensor::with_layout(Layout layout) const { return Tensor(shape_, layout, data_); }

bool operator==(const Tensor& a, const Tensor& b) {
  if (a.shape_ != b.shape_ || a.layout_ != b.layout_ || a.dtype() != b.dtype()) return false;
  if (a.dtype() == DType::kF64) {
    const auto x = a.values<double>();
    const auto y = b.values<double>();
    return x.empty() || std::memcmp(x.data(), y.data(), x.size_bytes()) == 0;
  }
  return a.data_ == b.data_;
}

Tensor to_f64(const Tensor& t) {
  return Tensor(t.shape(), t.layout(), t.to_f64_vector());
}

}  // namespace winowise
