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
#include <span>
#include <string_view>
#include <vector>

#include "winowise/tensor.hpp"

namespace winowise::quant {

// Uniform symmetric quantizer. `offset` is only used by the error analysis;
// inference keeps it at 0. Rounding is half away from zero.
struct QuantParams {
  int bits = 8;
  double scale = 1.0;
  double offset = 0.0;
};

std::int64_t qmin(int bits);
std::int64_t qmax(int bits);
std::int64_t round_half_away(double v);

std::int64_t quantize(double x, const QuantParams& qp);
double dequantize(std::int64_t q, const QuantParams& qp);

enum class ScaleRole { kSB, kSG, kSBG };
std::string_view to_string(ScaleRole role);

// t x t positive per-tap scales. With pow2 set, every entry is an exact
// power of two.
class TapScaleMatrix {
 public:
  TapScaleMatrix() = default;
  TapScaleMatrix(int t, std::vector<double> scales, ScaleRole role, bool pow2 = false);
  static TapScaleMatrix uniform(int t, double s, ScaleRole role);

  int t() const noexcept { return t_; }
  bool pow2() const noexcept { return pow2_; }
  ScaleRole role() const noexcept { return role_; }
  double at(int i, int j) const { return s_[static_cast<std::size_t>(i * t_ + j)]; }
  const std::vector<double>& values() const noexcept { return s_; }
  // log2 of entry (i, j); only meaningful when pow2().
  int shift(int i, int j) const;

  // Serialized as an f64 MATRIX tensor.
  Tensor to_tensor() const;
  static TapScaleMatrix from_tensor(const Tensor& t, ScaleRole role);

  friend bool operator==(const TapScaleMatrix&, const TapScaleMatrix&) = default;

 private:
  int t_ = 0;
  std::vector<double> s_;
  ScaleRole role_ = ScaleRole::kSB;
  bool pow2_ = false;
};

// S_BG = S_B (.) S_G.
TapScaleMatrix combine(const TapScaleMatrix& sb, const TapScaleMatrix& sg);

bool is_power_of_two(double s);

// Running per-tap maxima of |value|.
struct CalibState {
  int t = 0;
  std::vector<double> maxima;
  double decay = 0.9;
  std::int64_t count = 0;

  explicit CalibState(int taps = 0, double decay_factor = 0.9);
};

// `tiles` holds a batch of t x t tiles back to back. The first observation
// initializes the maxima; later ones blend with max_new = decay * old +
// (1 - decay) * batch_max. An empty batch leaves the state untouched.
CalibState calibrate_update(const CalibState& state, std::span<const double> tiles);
CalibState calibrate_update(const CalibState& state, const Tensor& tiles);

// s = max / 2^(n-1); taps with zero maximum get s = 2^-n.
TapScaleMatrix scales_from_maxima(const CalibState& state, int n, ScaleRole role);

// s -> 2^ceil(log2 s), entrywise.
TapScaleMatrix pow2_round(const TapScaleMatrix& s);
double pow2_ceil(double s);

// Straight-through gradient of the fake-quantized value s * clamp(round(x/s))
// with respect to log2 t, where s = 2^ceil(log2 t).
double ste_grad_log2t(double x, double t, int b);

}  // namespace winowise::quant
