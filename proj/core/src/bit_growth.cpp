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

#include "winowise/bit_growth.hpp"

#include <numeric>

namespace winowise::wino {

int signed_width(std::int64_t lo, std::int64_t hi) {
  int b = 1;
  while (b < 63) {
    const std::int64_t min = -(std::int64_t{1} << (b - 1));
    const std::int64_t max = (std::int64_t{1} << (b - 1)) - 1;
    if (lo >= min && hi <= max) return b;
    ++b;
  }
  return 64;
}

int bit_growth(const Matrix<std::int64_t>& t, int n) {
  if (n < 1 || n > 32) throw DomainError("input width must be in [1, 32]");
  const std::int64_t xmax = (std::int64_t{1} << (n - 1)) - 1;
  const std::int64_t xmin = -(std::int64_t{1} << (n - 1));
  int widest = n;
  // Row (i, j) of T (x) T has coefficients t(i, a) * t(j, b).
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.rows(); ++j) {
      std::int64_t pos = 0, neg = 0;
      for (int a = 0; a < t.cols(); ++a)
        for (int b = 0; b < t.cols(); ++b) {
          const auto c = t(i, a) * t(j, b);
          (c > 0 ? pos : neg) += c;
        }
      const auto hi = pos * xmax + neg * xmin;
      const auto lo = pos * xmin + neg * xmax;
      widest = std::max(widest, signed_width(lo, hi));
    }
  return widest - n;
}

Matrix<std::int64_t> integer_scaled(const Matrix<Rational>& m) {
  std::int64_t den = 1;
  for (const auto& v : m.data()) den = std::lcm(den, v.denominator());
  return m.map<std::int64_t>([den](const Rational& v) { return (v * den).numerator(); });
}

BitBudget bit_budget(const TransformSet& ts, int n, std::int64_t c_in) {
  if (c_in < 1) throw DomainError("c_in must be positive");
  BitBudget b;
  b.n = n;
  b.input = bit_growth(integer_scaled(ts.bt), n);
  b.weight = bit_growth(integer_scaled(ts.g), n);
  b.product = (n + b.input) + (n + b.weight) - n;
  int fold = 0;
  while ((std::int64_t{1} << fold) < c_in) ++fold;
  b.accumulation = b.product + fold;
  b.output = bit_growth(integer_scaled(ts.at), n);
  return b;
}

}  // namespace winowise::wino
