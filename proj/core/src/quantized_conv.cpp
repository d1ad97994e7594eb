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

#include "winowise/quantized_conv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "conv_internal.hpp"
#include "winowise/layout.hpp"

namespace winowise::quant {

using detail::i128;

std::string_view to_string(ScaleStrategy s) {
  switch (s) {
    case ScaleStrategy::kUniform: return "uniform";
    case ScaleStrategy::kTapwise: return "tapwise";
    case ScaleStrategy::kTapwisePow2: return "tapwise-pow2";
  }
  return "?";
}

ScaleStrategy parse_scale_strategy(std::string_view name) {
  if (name == "uniform") return ScaleStrategy::kUniform;
  if (name == "tapwise") return ScaleStrategy::kTapwise;
  if (name == "tapwise-pow2" || name == "tapwise_pow2") return ScaleStrategy::kTapwisePow2;
  throw ConfigError("unknown scale strategy '" + std::string(name) +
                    "' (expected uniform|tapwise|tapwise-pow2)");
}

std::int64_t quantize_shift(std::int64_t v, int shift, int bits) {
  std::int64_t q;
  if (shift <= 0) {
    const int up = -shift;
    // Saturate early: any |v| >= 2^bits already clamps.
    if (up >= 62 || std::abs(v) > (std::int64_t{1} << (62 - up))) {
      q = v == 0 ? 0 : (v > 0 ? qmax(bits) : qmin(bits));
    } else {
      q = v * (std::int64_t{1} << up);
    }
  } else if (shift >= 63) {
    q = 0;
  } else {
    // Round half away from zero on the magnitude.
    const std::uint64_t mag = v < 0 ? static_cast<std::uint64_t>(-(v + 1)) + 1 : static_cast<std::uint64_t>(v);
    const std::uint64_t half = std::uint64_t{1} << (shift - 1);
    const std::uint64_t r = (mag + half) >> shift;
    q = v < 0 ? -static_cast<std::int64_t>(r) : static_cast<std::int64_t>(r);
  }
  return std::clamp(q, qmin(bits), qmax(bits));
}

namespace {

struct Dims {
  std::int64_t n, cin, h, w, cout, oh, ow, pad;
};

Tensor as_nchw(const Tensor& x, const Tensor& w, wino::Padding padding, Dims& d) {
  if (!detail::is_integer_dtype(x.dtype()) || !detail::is_integer_dtype(w.dtype())) {
    throw ShapeError("quantized Winograd convolution expects integer activations and weights");
  }
  if (w.rank() != 4 || w.dim(2) != 3 || w.dim(3) != 3) {
    throw UnsupportedError("quantized Winograd convolution requires (C_out, C_in, 3, 3) weights");
  }
  Tensor xn = x.layout() == Layout::kFractal ? fractal_to_nchw(x, w.dim(1)) : x;
  if (xn.rank() != 4) throw ShapeError("activations must be NCHW or FRACTAL");
  if (xn.dim(1) != w.dim(1)) throw ShapeError("activation and weight channel counts differ");
  d.n = xn.dim(0);
  d.cin = xn.dim(1);
  d.h = xn.dim(2);
  d.w = xn.dim(3);
  d.cout = w.dim(0);
  d.pad = padding == wino::Padding::kSame ? 1 : 0;
  d.oh = wino::conv_output_extent(d.h, 3, padding, 1);
  d.ow = wino::conv_output_extent(d.w, 3, padding, 1);
  if (d.oh <= 0 || d.ow <= 0) throw ShapeError("input smaller than the kernel under valid padding");
  return xn;
}

// Integer-form input tiles: (n, tile_y, tile_x, c_in) major, t*t each.
std::vector<i128> input_tiles(const std::vector<i128>& xv, const Dims& d, const wino::IntegerForm& f,
                              int t, int m) {
  const auto th = (d.oh + m - 1) / m, tw = (d.ow + m - 1) / m;
  const auto tt = static_cast<std::size_t>(t * t);
  std::vector<i128> out(static_cast<std::size_t>(d.n * th * tw * d.cin) * tt);
  std::vector<i128> tile(tt);
  std::size_t o = 0;
  for (std::int64_t n = 0; n < d.n; ++n)
    for (std::int64_t ty = 0; ty < th; ++ty)
      for (std::int64_t tx = 0; tx < tw; ++tx)
        for (std::int64_t c = 0; c < d.cin; ++c) {
          const i128* plane = xv.data() + (n * d.cin + c) * d.h * d.w;
          for (int a = 0; a < t; ++a)
            for (int b = 0; b < t; ++b) {
              const auto y = ty * m - d.pad + a, x = tx * m - d.pad + b;
              tile[static_cast<std::size_t>(a * t + b)] =
                  (y < 0 || y >= d.h || x < 0 || x >= d.w) ? 0 : plane[y * d.w + x];
            }
          detail::sandwich(f.bt.data().data(), t, t, tile.data(), out.data() + o);
          o += tt;
        }
  return out;
}

std::vector<i128> weight_tiles(const std::vector<i128>& wv, std::int64_t pairs,
                               const wino::IntegerForm& f, int t) {
  const auto tt = static_cast<std::size_t>(t * t);
  std::vector<i128> out(static_cast<std::size_t>(pairs) * tt);
  for (std::int64_t i = 0; i < pairs; ++i)
    detail::sandwich(f.g.data().data(), t, 3, wv.data() + i * 9, out.data() + static_cast<std::size_t>(i) * tt);
  return out;
}

std::int64_t narrow(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw OverflowError("Winograd-domain value exceeds 64 bits");
  }
  return static_cast<std::int64_t>(v);
}

std::int64_t quantize_tap(i128 v, double scale, int shift, int bits, RescaleBackend backend) {
  const auto iv = narrow(v);
  if (backend == RescaleBackend::kShift) return quantize_shift(iv, shift, bits);
  return quantize(static_cast<double>(iv), QuantParams{bits, scale, 0.0});
}

std::vector<double> to_doubles(const std::vector<i128>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](i128 x) { return static_cast<double>(x); });
  return out;
}

}  // namespace

Tensor quantized_winograd_conv2d(const Tensor& x, const Tensor& w, const wino::TransformSet& ts,
                                 const TapScaleMatrix& sb, const TapScaleMatrix& sg, int b,
                                 wino::Padding padding, RescaleBackend backend) {
  if (b < 2 || b > 32) throw DomainError("Winograd-domain width must be in [2, 32]");
  if (ts.r != 3) throw UnsupportedError("only 3x3 kernels are supported");
  const int t = ts.t, m = ts.m;
  if (sb.t() != t || sg.t() != t) throw ShapeError("tap scale matrices must be t x t");
  if (backend == RescaleBackend::kShift && !(sb.pow2() && sg.pow2())) {
    throw ConfigError("shift backend requires power-of-two tap scales");
  }
  Dims d{};
  const Tensor xn = as_nchw(x, w, padding, d);
  const auto f = wino::integer_form(ts);
  const auto tt = static_cast<std::size_t>(t * t);

  const auto xg = detail::to_int_grid(xn);
  const auto wg = detail::to_int_grid(w);
  const auto v = input_tiles(xg.v, d, f, t, m);
  const auto u = weight_tiles(wg.v, d.cout * d.cin, f, t);

  std::vector<int> sh_b(tt), sh_g(tt);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) {
      sh_b[static_cast<std::size_t>(i * t + j)] = sb.pow2() ? sb.shift(i, j) : 0;
      sh_g[static_cast<std::size_t>(i * t + j)] = sg.pow2() ? sg.shift(i, j) : 0;
    }

  std::vector<std::int32_t> qv(v.size()), qw(u.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto k = i % tt;
    qv[i] = static_cast<std::int32_t>(quantize_tap(v[i], sb.values()[k], sh_b[k], b, backend));
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto k = i % tt;
    qw[i] = static_cast<std::int32_t>(quantize_tap(u[i], sg.values()[k], sh_g[k], b, backend));
  }

  // Back-transform with the folded row scales: Y = at Z at^T / at_den^2.
  const auto at = f.at.map<double>([](std::int64_t c) { return static_cast<double>(c); });
  // Divide rather than multiply by the reciprocal so exact quotients stay exact.
  const double den2 = static_cast<double>(f.at_den) * static_cast<double>(f.at_den);
  const auto sbg = combine(sb, sg);

  const auto th = (d.oh + m - 1) / m, tw = (d.ow + m - 1) / m;
  const Shape out_shape{d.n, d.cout, d.oh, d.ow};
  std::vector<double> out(static_cast<std::size_t>(shape_numel(out_shape)));
  std::vector<double> z(tt);
  double y[8 * 8];
  std::size_t tile_index = 0;
  for (std::int64_t n = 0; n < d.n; ++n)
    for (std::int64_t ty = 0; ty < th; ++ty)
      for (std::int64_t tx = 0; tx < tw; ++tx, ++tile_index) {
        const std::int32_t* tv = qv.data() + tile_index * static_cast<std::size_t>(d.cin) * tt;
        for (std::int64_t co = 0; co < d.cout; ++co) {
          for (std::size_t k = 0; k < tt; ++k) {
            std::int32_t acc = 0;
            for (std::int64_t ci = 0; ci < d.cin; ++ci) {
              const auto p = static_cast<std::int64_t>(tv[static_cast<std::size_t>(ci) * tt + k]) *
                             qw[static_cast<std::size_t>(co * d.cin + ci) * tt + k];
              if (p > std::numeric_limits<std::int32_t>::max() ||
                  p < std::numeric_limits<std::int32_t>::min() ||
                  __builtin_add_overflow(acc, static_cast<std::int32_t>(p), &acc)) {
                throw OverflowError("int32 Winograd-domain accumulator overflow");
              }
            }
            z[k] = static_cast<double>(acc) * sbg.values()[k];
          }
          detail::sandwich(at.data().data(), m, t, z.data(), y);
          for (int a = 0; a < m; ++a)
            for (int c = 0; c < m; ++c) {
              const auto oy = ty * m + a, ox = tx * m + c;
              if (oy < d.oh && ox < d.ow) {
                out[static_cast<std::size_t>(((n * d.cout + co) * d.oh + oy) * d.ow + ox)] =
                    y[a * m + c] / den2;
              }
            }
        }
      }
  Tensor result(out_shape, Layout::kNCHW, std::move(out));
  return x.layout() == Layout::kFractal ? nchw_to_fractal(result) : result;
}

std::vector<double> input_tap_tiles(const Tensor& x, const wino::TransformSet& ts,
                                    wino::Padding padding) {
  if (!detail::is_integer_dtype(x.dtype())) throw ShapeError("expected integer activations");
  Tensor xn = x.layout() == Layout::kFractal ? fractal_to_nchw(x, x.dim(1) * kFractalC0) : x;
  if (xn.rank() != 4) throw ShapeError("activations must be NCHW or FRACTAL");
  Dims d{xn.dim(0), xn.dim(1), xn.dim(2), xn.dim(3), 0, 0, 0, padding == wino::Padding::kSame ? 1 : 0};
  d.oh = wino::conv_output_extent(d.h, 3, padding, 1);
  d.ow = wino::conv_output_extent(d.w, 3, padding, 1);
  if (d.oh <= 0 || d.ow <= 0) throw ShapeError("input smaller than the kernel under valid padding");
  return to_doubles(input_tiles(detail::to_int_grid(xn).v, d, wino::integer_form(ts), ts.t, ts.m));
}

std::vector<double> weight_tap_tiles(const Tensor& w, const wino::TransformSet& ts) {
  if (!detail::is_integer_dtype(w.dtype())) throw ShapeError("expected integer weights");
  if (w.rank() != 4 || w.dim(2) != 3 || w.dim(3) != 3) throw ShapeError("expected (C_out, C_in, 3, 3) weights");
  return to_doubles(weight_tiles(detail::to_int_grid(w).v, w.dim(0) * w.dim(1), wino::integer_form(ts), ts.t));
}

TapScaleMatrix scales_for_strategy(const CalibState& state, int b, ScaleStrategy strategy,
                                   ScaleRole role) {
  if (strategy == ScaleStrategy::kUniform) {
    CalibState flat = state;
    const double mx = state.maxima.empty() ? 0.0 : *std::max_element(state.maxima.begin(), state.maxima.end());
    std::fill(flat.maxima.begin(), flat.maxima.end(), mx);
    return scales_from_maxima(flat, b, role);
  }
  auto s = scales_from_maxima(state, b, role);
  return strategy == ScaleStrategy::kTapwisePow2 ? pow2_round(s) : s;
}

CalibratedScales calibrate_scales(const Tensor& x, const Tensor& w, const wino::TransformSet& ts,
                                  int b, ScaleStrategy strategy, wino::Padding padding) {
  const auto xs = input_tap_tiles(x, ts, padding);
  const auto ws = weight_tap_tiles(w, ts);
  const auto sx = calibrate_update(CalibState(ts.t), std::span<const double>(xs));
  const auto sw = calibrate_update(CalibState(ts.t), std::span<const double>(ws));
  return {scales_for_strategy(sx, b, strategy, ScaleRole::kSB),
          scales_for_strategy(sw, b, strategy, ScaleRole::kSG)};
}

}  // namespace winowise::quant
