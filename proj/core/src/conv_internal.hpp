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

// Helpers shared by the exact and quantized convolution paths.

#include <cstdint>
#include <vector>

#include "winowise/errors.hpp"
#include "winowise/tensor.hpp"

namespace winowise::detail {

using i128 = __int128;

inline i128 checked_mul(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("128-bit multiply overflow");
  return r;
}

inline i128 checked_add(i128 a, i128 b) {
  i128 r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("128-bit accumulate overflow");
  return r;
}

// Tensor values as integers on a common grid: value = v[i] * 2^-exp.
struct IntGrid {
  std::vector<i128> v;
  std::int64_t exp = 0;
};

IntGrid to_int_grid(const Tensor& t);

bool is_integer_dtype(DType d);

// num * 2^-exp as a dyadic, throwing if it does not fit 64 bits.
Dyadic make_dyadic(i128 num, std::int64_t exp);

// num * 2^-exp as an i32, throwing if it is not an integer in range.
std::int32_t make_i32(i128 num, std::int64_t exp);

// out (ro x ro) = M (ro x ri) * X (ri x ri) * M^T, exact with overflow checks.
void sandwich(const std::int64_t* m, int ro, int ri, const i128* x, i128* out);

// Same in double precision.
void sandwich(const double* m, int ro, int ri, const double* x, double* out);

}  // namespace winowise::detail
