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

#include "winowise/transforms.hpp"

namespace winowise::wino {

// Extra bits, beyond the n-bit signed input, needed to hold every output of
// the 2-D transform T X T^T bit-true. T must be integer; the bound is the
// exact worst case over all n-bit signed X (each row of T (x) T is maximized
// and minimized separately, so asymmetric two's-complement ranges count).
int bit_growth(const Matrix<std::int64_t>& t, int n);

// Smallest two's-complement width holding every integer in [lo, hi].
int signed_width(std::int64_t lo, std::int64_t hi);

// Scales a rational matrix by the lcm of all its denominators.
Matrix<std::int64_t> integer_scaled(const Matrix<Rational>& m);

// Per-stage widths for an F_m pipeline on n-bit operands, in extra bits over
// n. Weights use the common-denominator integer scaling of G. `product` is
// the width of one Winograd-domain product over n, `accumulation` adds the
// C_in-fold sum, `output` is the back-transform growth at n-bit input.
struct BitBudget {
  int n = 8;
  int input = 0;
  int weight = 0;
  int product = 0;
  int accumulation = 0;
  int output = 0;
};
BitBudget bit_budget(const TransformSet& ts, int n, std::int64_t c_in = 1);

}  // namespace winowise::wino
