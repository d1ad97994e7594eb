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

#include "winowise/quant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace winowise::quant {

std::int64_t qmin(int bits) { return -(std::int64_t{1} << (bits - 1)); }
std::int64_t qmax(int bits) { return (std::int64_t{1} << (bits - 1)) - 1; }

std::int64_t round_half_away(double v) {
  // std::llround rounds halfway cases away from zero.
  return static_cast<std::int64_t>(std::llround(v));
}

namespace {

void check_bits(int bits) {
  if (bits < 2 || bits > 32) throw DomainError("bit width must be in [2, 32], got " + std::to_string(bits));
}

}  // namespace

std::int64_t quantize(double x, const QuantParams& qp) {
  check_bits(qp.bits);
  if (!(qp.scale > 0)) throw DomainError("quantization scale must be positive");
  const double v = (x - qp.offset) / qp.scale;
  const double lo = static_cast<double>(qmin(qp.bits));
  const double hi = static_cast<double>(qmax(qp.bits));
  // Clamp before rounding so huge values cannot overflow llround.
  if (v <= lo) return qmin(qp.bits);
  if (v >= hi) return qmax(qp.bits);
  return std::clamp(round_half_away(v), qmin(qp.bits), qmax(qp.bits));
}

double dequantize(std::int64_t q, const QuantParams& qp) {
  return static_cast<double>(q) * qp.scale + qp.offset;
}

std::string_view to_string(ScaleRole role) {
  switch (role) {
    case ScaleRole::kSB: return "S_B";
    case ScaleRole::kSG: return "S_G";
    case ScaleRole::kSBG: return "S_BG";
  }
  return "?";
}

bool is_power_of_two(double s) {
  if (!(s > 0) || !std::isfinite(s)) return false;
  int e = 0;
  return std::frexp(s, &e) == 0.5;
}

TapScaleMatrix::TapScaleMatrix(int t, std::vector<double> scales, ScaleRole role, bool pow2)
    : t_(t), s_(std::move(scales)), role_(role), pow2_(pow2) {
  if (t_ <= 0 || s_.size() != static_cast<std::size_t>(t_ * t_)) {
    throw ShapeError("tap scale matrix needs t*t entries");
  }
  for (double s : s_) {
    if (!(s > 0) || !std::isfinite(s)) throw DomainError("tap scales must be positive and finite");
    if (pow2_ && !is_power_of_two(s)) {
      throw DomainError("tap scale " + std::to_string(s) + " is not a power of two");
    }
  }
}

TapScaleMatrix TapScaleMatrix::uniform(int t, double s, ScaleRole role) {
  return TapScaleMatrix(t, std::vector<double>(static_cast<std::size_t>(t * t), s), role,
                        is_power_of_two(s));
}

int TapScaleMatrix::shift(int i, int j) const {
  int e = 0;
  std::frexp(at(i, j), &e);
  return e - 1;
}

Tensor TapScaleMatrix::to_tensor() const {
  return Tensor(Shape{t_, t_}, Layout::kMatrix, s_);
}

TapScaleMatrix TapScaleMatrix::from_tensor(const Tensor& t, ScaleRole role) {
  if (t.rank() != 2 || t.dim(0) != t.dim(1)) throw ShapeError("scale tensor must be square 2-D");
  auto v = t.to_f64_vector();
  const bool pow2 = std::all_of(v.begin(), v.end(), is_power_of_two);
  return TapScaleMatrix(static_cast<int>(t.dim(0)), std::move(v), role, pow2);
}

TapScaleMatrix combine(const TapScaleMatrix& sb, const TapScaleMatrix& sg) {
  if (sb.t() != sg.t()) throw ShapeError("S_B and S_G sizes differ");
  std::vector<double> s(sb.values().size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = sb.values()[i] * sg.values()[i];
  return TapScaleMatrix(sb.t(), std::move(s), ScaleRole::kSBG, sb.pow2() && sg.pow2());
}

CalibState::CalibState(int taps, double decay_factor) : t(taps), decay(decay_factor) {
  if (t < 0) throw DomainError("tap count must be non-negative");
  if (!(decay > 0 && decay <= 1)) throw DomainError("decay must lie in (0, 1]");
  maxima.assign(static_cast<std::size_t>(t * t), 0.0);
}

CalibState calibrate_update(const CalibState& state, std::span<const double> tiles) {
  const auto tt = static_cast<std::size_t>(state.t * state.t);
  if (tiles.empty()) return state;
  if (tt == 0 || tiles.size() % tt != 0) {
    throw ShapeError("batch size is not a multiple of t*t = " + std::to_string(tt));
  }
  std::vector<double> batch_max(tt, 0.0);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    batch_max[i % tt] = std::max(batch_max[i % tt], std::abs(tiles[i]));
  }
  CalibState next = state;
  for (std::size_t k = 0; k < tt; ++k) {
    next.maxima[k] = state.count == 0
                         ? batch_max[k]
                         : state.decay * state.maxima[k] + (1 - state.decay) * batch_max[k];
  }
  ++next.count;
  return next;
}

CalibState calibrate_update(const CalibState& state, const Tensor& tiles) {
  if (tiles.numel() == 0) return state;
  const auto r = tiles.rank();
  if (r < 2 || tiles.dim(r - 1) != state.t || tiles.dim(r - 2) != state.t) {
    throw ShapeError("calibration batch must end in (t, t) = (" + std::to_string(state.t) +
                     ", " + std::to_string(state.t) + "), got " + shape_to_string(tiles.shape()));
  }
  const auto v = tiles.to_f64_vector();
  return calibrate_update(state, std::span<const double>(v));
}

TapScaleMatrix scales_from_maxima(const CalibState& state, int n, ScaleRole role) {
  check_bits(n);
  const double denom = std::ldexp(1.0, n - 1);
  std::vector<double> s(state.maxima.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = state.maxima[i] > 0 ? state.maxima[i] / denom : std::ldexp(1.0, -n);
  }
  const bool pow2 = std::all_of(s.begin(), s.end(), is_power_of_two);
  return TapScaleMatrix(state.t, std::move(s), role, pow2);
}

double pow2_ceil(double s) {
  if (!(s > 0) || !std::isfinite(s)) throw DomainError("scale must be positive and finite");
  int e = 0;
  const double mant = std::frexp(s, &e);  // s = mant * 2^e, mant in [0.5, 1)
  return mant == 0.5 ? s : std::ldexp(1.0, e);
}

TapScaleMatrix pow2_round(const TapScaleMatrix& s) {
  std::vector<double> v(s.values().size());
  std::transform(s.values().begin(), s.values().end(), v.begin(), pow2_ceil);
  return TapScaleMatrix(s.t(), std::move(v), s.role(), true);
}

double ste_grad_log2t(double x, double t, int b) {
  if (!(t > 0) || !std::isfinite(t)) throw DomainError("scale parameter t must be positive");
  check_bits(b);
  const double s = pow2_ceil(t);
  const double v = x / s;
  const double lo = static_cast<double>(qmin(b));
  const double hi = static_cast<double>(qmax(b));
  const double k = s * std::numbers::ln2;
  if (v < lo) return k * lo;
  if (v > hi) return k * hi;
  return k * (static_cast<double>(round_half_away(v)) - v);
}

}  // namespace winowise::quant
