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

#include "winowise/transforms.hpp"

#include <numeric>

namespace winowise::wino {

namespace {

Rational q(std::int64_t n, std::int64_t d = 1) { return Rational(n, d); }

TransformSet f2_set() {
  TransformSet ts;
  ts.m = 2;
  ts.t = 4;
  ts.bt = Matrix<Rational>{{q(1), q(0), q(-1), q(0)},
                           {q(0), q(1), q(1), q(0)},
                           {q(0), q(-1), q(1), q(0)},
                           {q(0), q(1), q(0), q(-1)}};
  ts.g = Matrix<Rational>{{q(1), q(0), q(0)},
                          {q(1, 2), q(1, 2), q(1, 2)},
                          {q(1, 2), q(-1, 2), q(1, 2)},
                          {q(0), q(0), q(1)}};
  ts.at = Matrix<Rational>{{q(1), q(1), q(1), q(0)}, {q(0), q(1), q(-1), q(-1)}};
  return ts;
}

TransformSet f4_set() {
  TransformSet ts;
  ts.m = 4;
  ts.t = 6;
  ts.bt = Matrix<Rational>{{q(4), q(0), q(-5), q(0), q(1), q(0)},
                           {q(0), q(-4), q(-4), q(1), q(1), q(0)},
                           {q(0), q(4), q(-4), q(-1), q(1), q(0)},
                           {q(0), q(-2), q(-1), q(2), q(1), q(0)},
                           {q(0), q(2), q(-1), q(-2), q(1), q(0)},
                           {q(0), q(4), q(0), q(-5), q(0), q(1)}};
  // 1/3 * [[3/4,0,0],[-1/2,-1/2,-1/2],[-1/2,1/2,-1/2],[1/8,1/4,1/2],
  //        [1/8,-1/4,1/2],[0,0,3]]
  const Matrix<Rational> printed{{q(3, 4), q(0), q(0)},
                                 {q(-1, 2), q(-1, 2), q(-1, 2)},
                                 {q(-1, 2), q(1, 2), q(-1, 2)},
                                 {q(1, 8), q(1, 4), q(1, 2)},
                                 {q(1, 8), q(-1, 4), q(1, 2)},
                                 {q(0), q(0), q(3)}};
  ts.g = printed.map<Rational>([](const Rational& v) { return v / 3; });
  ts.at = Matrix<Rational>{{q(1), q(1), q(1), q(1), q(1), q(0)},
                           {q(0), q(1), q(-1), q(2), q(-2), q(0)},
                           {q(0), q(1), q(1), q(4), q(4), q(0)},
                           {q(0), q(1), q(-1), q(8), q(-8), q(1)}};
  return ts;
}

// Coefficients (ascending powers) of prod (x - roots[k]).
std::vector<Rational> poly_from_roots(const std::vector<Rational>& roots) {
  std::vector<Rational> c{q(1)};
  for (const auto& a : roots) {
    std::vector<Rational> next(c.size() + 1, q(0));
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= a * c[i];
    }
    c = std::move(next);
  }
  return c;
}

Rational rpow(const Rational& a, int e) {
  Rational r(1);
  for (int i = 0; i < e; ++i) r *= a;
  return r;
}

}  // namespace

TransformSet make_transform_set(int m) {
  switch (m) {
    case 2: return f2_set();
    case 4: return f4_set();
    default:
      throw UnsupportedError("unsupported Winograd tile size m=" + std::to_string(m) +
                             " (supported: 2, 4)");
  }
}

TransformSet toom_cook_transform_set(const std::vector<Rational>& points) {
  const int r = 3;
  const int n = static_cast<int>(points.size()) + 1;  // t
  const int m = n - r + 1;
  if (m < 1) throw UnsupportedError("need at least 2 interpolation points");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i] == points[j]) throw DomainError("interpolation points must be distinct");

  TransformSet ts;
  ts.m = m;
  ts.r = r;
  ts.t = n;
  ts.bt = Matrix<Rational>(n, n, q(0));
  ts.g = Matrix<Rational>(n, r, q(0));
  ts.at = Matrix<Rational>(m, n, q(0));

  for (int i = 0; i < n - 1; ++i) {
    std::vector<Rational> others;
    Rational f(1);
    for (int k = 0; k < n - 1; ++k) {
      if (k == i) continue;
      others.push_back(points[static_cast<std::size_t>(k)]);
      f *= points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(k)];
    }
    const auto poly = poly_from_roots(others);
    for (int c = 0; c < n; ++c) {
      ts.bt(i, c) = c < static_cast<int>(poly.size()) ? poly[static_cast<std::size_t>(c)] : q(0);
    }
    for (int k = 0; k < r; ++k) ts.g(i, k) = rpow(points[static_cast<std::size_t>(i)], k) / f;
    for (int j = 0; j < m; ++j) ts.at(j, i) = rpow(points[static_cast<std::size_t>(i)], j);
  }
  const auto full = poly_from_roots(points);
  for (int c = 0; c < n; ++c) ts.bt(n - 1, c) = full[static_cast<std::size_t>(c)];
  ts.g(n - 1, r - 1) = q(1);
  ts.at(m - 1, n - 1) = q(1);
  return ts;
}

bool validate_transform_set(const TransformSet& ts) {
  const int t = ts.t, m = ts.m, r = ts.r;
  if (ts.bt.rows() != t || ts.bt.cols() != t || ts.g.rows() != t || ts.g.cols() != r ||
      ts.at.rows() != m || ts.at.cols() != t || t != m + r - 1) {
    return false;
  }
  // Linearity: checking every (e_ij, e_kl) pair covers all inputs.
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) {
      Matrix<Rational> x(t, t, q(0));
      x(i, j) = q(1);
      const auto v = input_transform(x, ts);
      for (int k = 0; k < r; ++k)
        for (int l = 0; l < r; ++l) {
          Matrix<Rational> f(r, r, q(0));
          f(k, l) = q(1);
          const auto y = output_transform(hadamard(weight_transform(f, ts), v), ts);
          for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
              // Valid correlation of a delta at (i,j) with a delta at (k,l).
              const Rational expect = (a + k == i && b + l == j) ? q(1) : q(0);
              if (y(a, b) != expect) return false;
            }
        }
    }
  return true;
}

TransformSet rescale_taps(const TransformSet& ts, const std::vector<Rational>& scale) {
  if (static_cast<int>(scale.size()) != ts.t) throw ShapeError("need one scale per tap row");
  TransformSet out = ts;
  for (int i = 0; i < ts.t; ++i) {
    const auto s = scale[static_cast<std::size_t>(i)];
    if (s == q(0)) throw DomainError("tap scale must be non-zero");
    for (int c = 0; c < ts.t; ++c) out.bt(i, c) *= s;
    for (int c = 0; c < ts.r; ++c) out.g(i, c) /= s;
  }
  return out;
}

RowFactorization factor_rows(const Matrix<Rational>& mat) {
  RowFactorization f;
  f.integer = Matrix<std::int64_t>(mat.rows(), mat.cols(), 0);
  f.row_scale.assign(static_cast<std::size_t>(mat.rows()), q(1));
  for (int i = 0; i < mat.rows(); ++i) {
    std::int64_t den = 1;
    for (int j = 0; j < mat.cols(); ++j) den = std::lcm(den, mat(i, j).denominator());
    std::int64_t g = 0;
    for (int j = 0; j < mat.cols(); ++j) {
      const auto v = mat(i, j) * den;
      f.integer(i, j) = v.numerator();
      g = std::gcd(g, v.numerator());
    }
    if (g == 0) continue;
    for (int j = 0; j < mat.cols(); ++j) f.integer(i, j) /= g;
    f.row_scale[static_cast<std::size_t>(i)] = Rational(g, den);
  }
  return f;
}

IntegerForm integer_form(const TransformSet& ts) {
  IntegerForm f;
  auto b = factor_rows(ts.bt);
  auto g = factor_rows(ts.g);
  f.bt = std::move(b.integer);
  f.g = std::move(g.integer);
  f.b_scale = std::move(b.row_scale);
  f.g_scale = std::move(g.row_scale);
  Matrix<Rational> at = ts.at;
  std::int64_t den = 1;
  for (int j = 0; j < at.rows(); ++j)
    for (int i = 0; i < at.cols(); ++i) {
      at(j, i) *= f.b_scale[static_cast<std::size_t>(i)] * f.g_scale[static_cast<std::size_t>(i)];
      den = std::lcm(den, at(j, i).denominator());
    }
  f.at_den = den;
  f.at = at.map<std::int64_t>([den](const Rational& v) { return (v * den).numerator(); });
  return f;
}

bool is_dyadic(const Matrix<Rational>& mat) {
  for (const auto& v : mat.data()) {
    const auto d = static_cast<std::uint64_t>(v.denominator());
    if ((d & (d - 1)) != 0) return false;
  }
  return true;
}

namespace {

// Scalar that counts the multiplications applied to it.
struct Counted {
  double v = 0;
  static inline thread_local std::int64_t muls = 0;
  Counted operator*(const Counted& o) const {
    ++muls;
    return {v * o.v};
  }
  Counted& operator+=(const Counted& o) {
    v += o.v;
    return *this;
  }
};

}  // namespace

MacCount count_tile_macs(const TransformSet& ts) {
  MacCount mc;
  Matrix<Counted> u(ts.t, ts.t, Counted{1}), v(ts.t, ts.t, Counted{1});
  Counted::muls = 0;
  (void)hadamard(u, v);
  mc.winograd = Counted::muls;

  Matrix<Counted> x(ts.t, ts.t, Counted{1}), f(ts.r, ts.r, Counted{1});
  Counted::muls = 0;
  for (int a = 0; a < ts.m; ++a)
    for (int b = 0; b < ts.m; ++b) {
      Counted acc;
      for (int k = 0; k < ts.r; ++k)
        for (int l = 0; l < ts.r; ++l) acc += x(a + k, b + l) * f(k, l);
    }
  mc.direct = Counted::muls;
  return mc;
}

Matrix<Rational> input_transform(const Matrix<Rational>& tile, const TransformSet& ts) {
  return input_transform(tile, ts.bt);
}
Matrix<Rational> weight_transform(const Matrix<Rational>& filter, const TransformSet& ts) {
  return weight_transform(filter, ts.g);
}
Matrix<Rational> output_transform(const Matrix<Rational>& taps, const TransformSet& ts) {
  return output_transform(taps, ts.at);
}
Matrix<double> input_transform(const Matrix<double>& tile, const TransformSet& ts) {
  return input_transform(tile, to_double(ts.bt));
}
Matrix<double> weight_transform(const Matrix<double>& filter, const TransformSet& ts) {
  return weight_transform(filter, to_double(ts.g));
}
Matrix<double> output_transform(const Matrix<double>& taps, const TransformSet& ts) {
  return output_transform(taps, to_double(ts.at));
}

}  // namespace winowise::wino
