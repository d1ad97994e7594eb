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

#include "winowise/conv.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "conv_internal.hpp"
#include "winowise/layout.hpp"

namespace winowise {

namespace detail {

bool is_integer_dtype(DType d) {
  return d == DType::kI8 || d == DType::kI16 || d == DType::kI32;
}

IntGrid to_int_grid(const Tensor& t) {
  IntGrid g;
  const auto n = static_cast<std::size_t>(t.numel());
  g.v.resize(n);
  if (is_integer_dtype(t.dtype())) {
    for (std::size_t i = 0; i < n; ++i)
      g.v[i] = static_cast<i128>(t.as_double(static_cast<std::int64_t>(i)));
    return g;
  }
  std::vector<Dyadic> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = t.as_dyadic(static_cast<std::int64_t>(i));
    g.exp = std::max(g.exp, d[i].exp());
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto shift = g.exp - d[i].exp();
    if (shift > 62) throw OverflowError("operand exponents too far apart for exact mode");
    g.v[i] = static_cast<i128>(d[i].num()) << shift;
  }
  return g;
}

Dyadic make_dyadic(i128 num, std::int64_t exp) {
  while (exp > 0 && num != 0 && (num & 1) == 0) {
    num /= 2;
    --exp;
  }
  while (exp < 0) {
    num = checked_mul(num, 2);
    ++exp;
  }
  if (num > std::numeric_limits<std::int64_t>::max() ||
      num < std::numeric_limits<std::int64_t>::min()) {
    throw OverflowError("exact result does not fit a 64-bit dyadic numerator");
  }
  return Dyadic(static_cast<std::int64_t>(num), exp);
}

std::int32_t make_i32(i128 num, std::int64_t exp) {
  const auto d = make_dyadic(num, exp);
  if (!d.is_integer()) throw Error("exact result is not an integer: " + d.to_string());
  if (d.num() > std::numeric_limits<std::int32_t>::max() ||
      d.num() < std::numeric_limits<std::int32_t>::min()) {
    throw OverflowError("result " + d.to_string() + " does not fit i32");
  }
  return static_cast<std::int32_t>(d.num());
}

void sandwich(const std::int64_t* m, int ro, int ri, const i128* x, i128* out) {
  if (ro > 8 || ri > 8) throw UnsupportedError("transform tiles larger than 8x8");
  // tmp = M X  (ro x ri)
  i128 tmp[8 * 8];
  for (int i = 0; i < ro; ++i)
    for (int j = 0; j < ri; ++j) {
      i128 acc = 0;
      for (int k = 0; k < ri; ++k) {
        const auto c = m[i * ri + k];
        if (c != 0) acc = checked_add(acc, checked_mul(c, x[k * ri + j]));
      }
      tmp[i * ri + j] = acc;
    }
  for (int i = 0; i < ro; ++i)
    for (int j = 0; j < ro; ++j) {
      i128 acc = 0;
      for (int k = 0; k < ri; ++k) {
        const auto c = m[j * ri + k];
        if (c != 0) acc = checked_add(acc, checked_mul(tmp[i * ri + k], c));
      }
      out[i * ro + j] = acc;
    }
}

void sandwich(const double* m, int ro, int ri, const double* x, double* out) {
  if (ro > 8 || ri > 8) throw UnsupportedError("transform tiles larger than 8x8");
  double tmp[8 * 8];
  for (int i = 0; i < ro; ++i)
    for (int j = 0; j < ri; ++j) {
      double acc = 0;
      for (int k = 0; k < ri; ++k) acc += m[i * ri + k] * x[k * ri + j];
      tmp[i * ri + j] = acc;
    }
  for (int i = 0; i < ro; ++i)
    for (int j = 0; j < ro; ++j) {
      double acc = 0;
      for (int k = 0; k < ri; ++k) acc += tmp[i * ri + k] * m[j * ri + k];
      out[i * ro + j] = acc;
    }
}

}  // namespace detail

namespace wino {

using detail::i128;

std::string_view to_string(Padding p) { return p == Padding::kSame ? "same" : "valid"; }

Padding parse_padding(std::string_view name) {
  if (name == "same") return Padding::kSame;
  if (name == "valid") return Padding::kValid;
  throw ConfigError("unknown padding '" + std::string(name) + "' (expected same|valid)");
}

ArithMode default_mode(const Tensor& x, const Tensor& w) {
  return (x.dtype() == DType::kF64 || w.dtype() == DType::kF64) ? ArithMode::kFloat
                                                                 : ArithMode::kExact;
}

std::int64_t conv_output_extent(std::int64_t in, std::int64_t k, Padding padding, int stride) {
  if (padding == Padding::kSame) return (in + stride - 1) / stride;
  if (in < k) return 0;
  return (in - k) / stride + 1;
}

namespace {

struct Geometry {
  std::int64_t n, cin, h, w, cout, k, oh, ow, pad;
};

// Validates operands and returns x as NCHW.
Tensor prepare(const Tensor& x, const Tensor& w, Padding padding, int stride, Geometry& g) {
  if (w.rank() != 4 || w.layout() != Layout::kNCHW) {
    throw ShapeError("weights must be a 4-D (C_out, C_in, kH, kW) tensor, got " +
                     shape_to_string(w.shape()));
  }
  if (stride != 1 && stride != 2) throw UnsupportedError("stride must be 1 or 2");
  if (w.dim(2) != w.dim(3)) throw UnsupportedError("only square kernels are supported");
  Tensor xn;
  if (x.layout() == Layout::kFractal) {
    xn = fractal_to_nchw(x, w.dim(1));
  } else if (x.layout() == Layout::kNCHW && x.rank() == 4) {
    xn = x;
  } else {
    throw ShapeError("activations must be NCHW or FRACTAL");
  }
  g.n = xn.dim(0);
  g.cin = xn.dim(1);
  g.h = xn.dim(2);
  g.w = xn.dim(3);
  g.cout = w.dim(0);
  g.k = w.dim(2);
  if (w.dim(1) != g.cin) {
    throw ShapeError("activation channels (" + std::to_string(g.cin) +
                     ") do not match weight input channels (" + std::to_string(w.dim(1)) + ")");
  }
  if (padding == Padding::kSame && g.k % 2 == 0) {
    throw UnsupportedError("same padding needs an odd kernel size");
  }
  g.pad = padding == Padding::kSame ? (g.k - 1) / 2 : 0;
  g.oh = conv_output_extent(g.h, g.k, padding, stride);
  g.ow = conv_output_extent(g.w, g.k, padding, stride);
  if (g.oh <= 0 || g.ow <= 0) {
    throw ShapeError("input " + std::to_string(g.h) + "x" + std::to_string(g.w) +
                     " is smaller than the kernel under valid padding");
  }
  return xn;
}

Tensor finish(Tensor out, const Tensor& x) {
  return x.layout() == Layout::kFractal ? nchw_to_fractal(out) : out;
}

// Reads the (n, c) plane of x at spatial (y, x) with zero padding.
template <class T>
struct Plane {
  const T* base;
  std::int64_t h, w;
  T at(std::int64_t y, std::int64_t x) const {
    return (y < 0 || y >= h || x < 0 || x >= w) ? T{} : base[y * w + x];
  }
};

}  // namespace

Tensor direct_conv2d(const Tensor& x, const Tensor& w, Padding padding, int stride) {
  Geometry g{};
  const Tensor xn = prepare(x, w, padding, stride, g);
  const Shape out_shape{g.n, g.cout, g.oh, g.ow};
  const auto plane = g.h * g.w;

  // Fixed loop nest: (n, co, oy, ox), then ci, ky, kx.
  if (default_mode(xn, w) == ArithMode::kFloat) {
    const auto xv = xn.to_f64_vector();
    const auto wv = w.to_f64_vector();
    std::vector<double> out(static_cast<std::size_t>(shape_numel(out_shape)));
    std::size_t o = 0;
    for (std::int64_t n = 0; n < g.n; ++n)
      for (std::int64_t co = 0; co < g.cout; ++co)
        for (std::int64_t oy = 0; oy < g.oh; ++oy)
          for (std::int64_t ox = 0; ox < g.ow; ++ox) {
            double acc = 0;
            for (std::int64_t ci = 0; ci < g.cin; ++ci) {
              const Plane<double> p{xv.data() + (n * g.cin + ci) * plane, g.h, g.w};
              const double* f = wv.data() + (co * g.cin + ci) * g.k * g.k;
              for (std::int64_t ky = 0; ky < g.k; ++ky)
                for (std::int64_t kx = 0; kx < g.k; ++kx)
                  acc += p.at(oy * stride + ky - g.pad, ox * stride + kx - g.pad) *
                         f[ky * g.k + kx];
            }
            out[o++] = acc;
          }
    return finish(Tensor(out_shape, Layout::kNCHW, std::move(out)), x);
  }

  const auto xg = detail::to_int_grid(xn);
  const auto wg = detail::to_int_grid(w);
  const bool int_out = detail::is_integer_dtype(xn.dtype()) && detail::is_integer_dtype(w.dtype());
  const auto numel = static_cast<std::size_t>(shape_numel(out_shape));
  std::vector<std::int32_t> out_i;
  std::vector<Dyadic> out_d;
  (int_out ? out_i.reserve(numel) : out_d.reserve(numel));
  for (std::int64_t n = 0; n < g.n; ++n)
    for (std::int64_t co = 0; co < g.cout; ++co)
      for (std::int64_t oy = 0; oy < g.oh; ++oy)
        for (std::int64_t ox = 0; ox < g.ow; ++ox) {
          i128 acc = 0;
          for (std::int64_t ci = 0; ci < g.cin; ++ci) {
            const Plane<i128> p{xg.v.data() + (n * g.cin + ci) * plane, g.h, g.w};
            const i128* f = wg.v.data() + (co * g.cin + ci) * g.k * g.k;
            for (std::int64_t ky = 0; ky < g.k; ++ky)
              for (std::int64_t kx = 0; kx < g.k; ++kx)
                acc = detail::checked_add(
                    acc, detail::checked_mul(
                             p.at(oy * stride + ky - g.pad, ox * stride + kx - g.pad),
                             f[ky * g.k + kx]));
          }
          if (int_out) {
            out_i.push_back(detail::make_i32(acc, 0));
          } else {
            out_d.push_back(detail::make_dyadic(acc, xg.exp + wg.exp));
          }
        }
  if (int_out) return finish(Tensor(out_shape, Layout::kNCHW, std::move(out_i)), x);
  return finish(Tensor(out_shape, Layout::kNCHW, std::move(out_d)), x);
}

Tensor winograd_conv2d(const Tensor& x, const Tensor& w, const TransformSet& ts,
                       Padding padding, int stride) {
  return winograd_conv2d(x, w, ts, padding, default_mode(x, w), stride);
}

namespace {

std::vector<double> flat(const Matrix<double>& m) { return m.data(); }

Tensor winograd_float(const Tensor& xn, const Tensor& w, const TransformSet& ts,
                      const Geometry& g) {
  const int t = ts.t, m = ts.m, r = ts.r;
  const auto bt = flat(to_double(ts.bt));
  const auto gm = flat(to_double(ts.g));
  const auto at = flat(to_double(ts.at));
  const auto xv = xn.to_f64_vector();
  const auto wv = w.to_f64_vector();
  const auto tt = static_cast<std::size_t>(t * t);

  std::vector<double> u(static_cast<std::size_t>(g.cout * g.cin) * tt);
  for (std::int64_t i = 0; i < g.cout * g.cin; ++i)
    detail::sandwich(gm.data(), t, r, wv.data() + i * r * r, u.data() + static_cast<std::size_t>(i) * tt);

  const auto th = (g.oh + m - 1) / m, tw = (g.ow + m - 1) / m;
  const Shape out_shape{g.n, g.cout, g.oh, g.ow};
  std::vector<double> out(static_cast<std::size_t>(shape_numel(out_shape)));
  std::vector<double> v(static_cast<std::size_t>(g.cin) * tt);
  std::vector<double> tile(tt), acc(tt);
  double y[8 * 8];
  for (std::int64_t n = 0; n < g.n; ++n)
    for (std::int64_t ty = 0; ty < th; ++ty)
      for (std::int64_t tx = 0; tx < tw; ++tx) {
        const auto y0 = ty * m - g.pad, x0 = tx * m - g.pad;
        for (std::int64_t ci = 0; ci < g.cin; ++ci) {
          const Plane<double> p{xv.data() + (n * g.cin + ci) * g.h * g.w, g.h, g.w};
          for (int a = 0; a < t; ++a)
            for (int b = 0; b < t; ++b) tile[static_cast<std::size_t>(a * t + b)] = p.at(y0 + a, x0 + b);
          detail::sandwich(bt.data(), t, t, tile.data(), v.data() + static_cast<std::size_t>(ci) * tt);
        }
        for (std::int64_t co = 0; co < g.cout; ++co) {
          std::fill(acc.begin(), acc.end(), 0.0);
          for (std::int64_t ci = 0; ci < g.cin; ++ci) {
            const double* uu = u.data() + static_cast<std::size_t>(co * g.cin + ci) * tt;
            const double* vv = v.data() + static_cast<std::size_t>(ci) * tt;
            for (std::size_t k = 0; k < tt; ++k) acc[k] += uu[k] * vv[k];
          }
          detail::sandwich(at.data(), m, t, acc.data(), y);
          for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
              const auto oy = ty * m + a, ox = tx * m + b;
              if (oy < g.oh && ox < g.ow)
                out[static_cast<std::size_t>(((n * g.cout + co) * g.oh + oy) * g.ow + ox)] = y[a * m + b];
            }
        }
      }
  return Tensor(out_shape, Layout::kNCHW, std::move(out));
}

Tensor winograd_exact(const Tensor& xn, const Tensor& w, const TransformSet& ts,
                      const Geometry& g) {
  const int t = ts.t, m = ts.m, r = ts.r;
  const auto form = integer_form(ts);
  const auto xg = detail::to_int_grid(xn);
  const auto wg = detail::to_int_grid(w);
  const bool int_out = detail::is_integer_dtype(xn.dtype()) && detail::is_integer_dtype(w.dtype());
  const auto tt = static_cast<std::size_t>(t * t);

  // Denominator at_den^2 = odd * 2^p2; the odd part must divide exactly.
  i128 den = static_cast<i128>(form.at_den) * form.at_den;
  std::int64_t p2 = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++p2;
  }
  const i128 odd = den;
  const auto exp = xg.exp + wg.exp + p2;

  std::vector<i128> u(static_cast<std::size_t>(g.cout * g.cin) * tt);
  for (std::int64_t i = 0; i < g.cout * g.cin; ++i)
    detail::sandwich(form.g.data().data(), t, r, wg.v.data() + i * r * r,
                     u.data() + static_cast<std::size_t>(i) * tt);

  const auto th = (g.oh + m - 1) / m, tw = (g.ow + m - 1) / m;
  const Shape out_shape{g.n, g.cout, g.oh, g.ow};
  const auto numel = static_cast<std::size_t>(shape_numel(out_shape));
  std::vector<std::int32_t> out_i(int_out ? numel : 0);
  std::vector<Dyadic> out_d(int_out ? 0 : numel);
  std::vector<i128> v(static_cast<std::size_t>(g.cin) * tt);
  std::vector<i128> tile(tt), acc(tt);
  i128 y[8 * 8];
  for (std::int64_t n = 0; n < g.n; ++n)
    for (std::int64_t ty = 0; ty < th; ++ty)
      for (std::int64_t tx = 0; tx < tw; ++tx) {
        const auto y0 = ty * m - g.pad, x0 = tx * m - g.pad;
        for (std::int64_t ci = 0; ci < g.cin; ++ci) {
          const Plane<i128> p{xg.v.data() + (n * g.cin + ci) * g.h * g.w, g.h, g.w};
          for (int a = 0; a < t; ++a)
            for (int b = 0; b < t; ++b) tile[static_cast<std::size_t>(a * t + b)] = p.at(y0 + a, x0 + b);
          detail::sandwich(form.bt.data().data(), t, t, tile.data(),
                           v.data() + static_cast<std::size_t>(ci) * tt);
        }
        for (std::int64_t co = 0; co < g.cout; ++co) {
          std::fill(acc.begin(), acc.end(), i128{0});
          for (std::int64_t ci = 0; ci < g.cin; ++ci) {
            const i128* uu = u.data() + static_cast<std::size_t>(co * g.cin + ci) * tt;
            const i128* vv = v.data() + static_cast<std::size_t>(ci) * tt;
            for (std::size_t k = 0; k < tt; ++k)
              acc[k] = detail::checked_add(acc[k], detail::checked_mul(uu[k], vv[k]));
          }
          detail::sandwich(form.at.data().data(), m, t, acc.data(), y);
          for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
              const auto oy = ty * m + a, ox = tx * m + b;
              if (oy >= g.oh || ox >= g.ow) continue;
              const auto num = y[a * m + b];
              if (num % odd != 0) throw Error("Winograd result is not dyadic; transform set is invalid");
              const auto idx = static_cast<std::size_t>(((n * g.cout + co) * g.oh + oy) * g.ow + ox);
              if (int_out) {
                out_i[idx] = detail::make_i32(num / odd, exp);
              } else {
                out_d[idx] = detail::make_dyadic(num / odd, exp);
              }
            }
        }
      }
  if (int_out) return Tensor(out_shape, Layout::kNCHW, std::move(out_i));
  return Tensor(out_shape, Layout::kNCHW, std::move(out_d));
}

}  // namespace

Tensor winograd_conv2d(const Tensor& x, const Tensor& w, const TransformSet& ts,
                       Padding padding, ArithMode mode, int stride) {
  if (stride != 1) throw UnsupportedError("Winograd convolution requires stride 1");
  if (w.rank() == 4 && (w.dim(2) != ts.r || w.dim(3) != ts.r)) {
    throw UnsupportedError("Winograd convolution requires a 3x3 kernel, got " +
                           std::to_string(w.dim(2)) + "x" + std::to_string(w.dim(3)));
  }
  Geometry g{};
  const Tensor xn = prepare(x, w, padding, stride, g);
  Tensor out = mode == ArithMode::kFloat ? winograd_float(xn, w, ts, g) : winograd_exact(xn, w, ts, g);
  return finish(std::move(out), x);
}

}  // namespace wino
}  // namespace winowise
