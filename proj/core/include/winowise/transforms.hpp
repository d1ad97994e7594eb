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
#include <vector>

#include "winowise/matrix.hpp"

namespace winowise::wino {

// Transformation matrices of F(m x m, 3 x 3). Entries are exact rationals.
struct TransformSet {
  int m = 0;
  int r = 3;
  int t = 0;  // m + r - 1
  Matrix<Rational> bt;  // t x t
  Matrix<Rational> g;   // t x r
  Matrix<Rational> at;  // m x t
};

// T == diag(row_scale) * integer, with each integer row primitive
// (gcd 1, first non-zero entry sign preserved) and row_scale > 0.
struct RowFactorization {
  Matrix<std::int64_t> integer;
  std::vector<Rational> row_scale;
};

// F2 and F4 sets. The F4 set is the one printed with the method (root points
// 0, +-1, +-2 and infinity); it passes validate_transform_set.
TransformSet make_transform_set(int m);

// Toom-Cook construction from m + 1 finite interpolation points plus the
// point at infinity.
TransformSet toom_cook_transform_set(const std::vector<Rational>& points);

// True iff the Winograd pipeline reproduces valid direct correlation for
// every pair of canonical basis tile/filter, in exact arithmetic.
bool validate_transform_set(const TransformSet& ts);

// Rows of BT and G multiplied by `scale[i]` and `1/scale[i]` respectively.
// The result stays valid; tap (i, j) of G f G^T is scaled by
// 1 / (scale[i] * scale[j]).
TransformSet rescale_taps(const TransformSet& ts, const std::vector<Rational>& scale);

RowFactorization factor_rows(const Matrix<Rational>& m);

// Integer realization of a transform set. With BT = diag(b_scale) * bt and
// G = diag(g_scale) * g, the Winograd-domain product picks up the tap factor
// d_i * d_j where d = b_scale * g_scale. That factor is folded into the
// back-transform: at = at_den * AT * diag(d), all integer.
struct IntegerForm {
  Matrix<std::int64_t> bt;
  Matrix<std::int64_t> g;
  Matrix<std::int64_t> at;
  std::int64_t at_den = 1;
  std::vector<Rational> b_scale;
  std::vector<Rational> g_scale;
};
IntegerForm integer_form(const TransformSet& ts);

// True iff every entry's denominator is a power of two.
bool is_dyadic(const Matrix<Rational>& m);

// Multiplications per m x m output tile for a single (C_in, C_out) pair:
// the Winograd elementwise product versus direct 3x3 correlation.
struct MacCount {
  std::int64_t winograd = 0;
  std::int64_t direct = 0;
  double reduction() const { return static_cast<double>(direct) / static_cast<double>(winograd); }
};
MacCount count_tile_macs(const TransformSet& ts);

template <class T>
Matrix<T> input_transform(const Matrix<T>& tile, const Matrix<T>& bt) {
  if (tile.rows() != bt.cols() || tile.cols() != bt.cols()) {
    throw ShapeError("input tile must be t x t");
  }
  return matmul(matmul(bt, tile), bt.transposed());
}

template <class T>
Matrix<T> weight_transform(const Matrix<T>& filter, const Matrix<T>& g) {
  if (filter.rows() != g.cols() || filter.cols() != g.cols()) {
    throw ShapeError("filter must be r x r");
  }
  return matmul(matmul(g, filter), g.transposed());
}

template <class T>
Matrix<T> output_transform(const Matrix<T>& taps, const Matrix<T>& at) {
  if (taps.rows() != at.cols() || taps.cols() != at.cols()) {
    throw ShapeError("Winograd-domain tile must be t x t");
  }
  return matmul(matmul(at, taps), at.transposed());
}

// Convenience overloads bound to a transform set, in exact or float mode.
Matrix<Rational> input_transform(const Matrix<Rational>& tile, const TransformSet& ts);
Matrix<Rational> weight_transform(const Matrix<Rational>& filter, const TransformSet& ts);
Matrix<Rational> output_transform(const Matrix<Rational>& taps, const TransformSet& ts);
Matrix<double> input_transform(const Matrix<double>& tile, const TransformSet& ts);
Matrix<double> weight_transform(const Matrix<double>& filter, const TransformSet& ts);
Matrix<double> output_transform(const Matrix<double>& taps, const TransformSet& ts);

}  // namespace winowise::wino
