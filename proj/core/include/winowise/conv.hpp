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

#include <string_view>

#include "winowise/tensor.hpp"
#include "winowise/transforms.hpp"

namespace winowise::wino {

enum class Padding { kSame, kValid };

std::string_view to_string(Padding p);
Padding parse_padding(std::string_view name);

// kFloat evaluates the transforms in IEEE double. kExact runs the integer
// pipeline (row-factored transforms, 128-bit accumulation) and reproduces the
// direct convolution bit for bit.
enum class ArithMode { kFloat, kExact };

// Picks kFloat when either operand is f64, kExact otherwise.
ArithMode default_mode(const Tensor& x, const Tensor& w);

// x: NCHW or FRACTAL activations; w: NCHW weights (C_out, C_in, 3, 3).
// Output has x's layout. Float mode returns f64; exact mode returns i32 for
// integer operands and rational otherwise.
Tensor winograd_conv2d(const Tensor& x, const Tensor& w, const TransformSet& ts,
                       Padding padding, int stride = 1);
Tensor winograd_conv2d(const Tensor& x, const Tensor& w, const TransformSet& ts,
                       Padding padding, ArithMode mode, int stride = 1);

// Reference cross-correlation for any odd k and stride 1 or 2. Accumulates in
// f64 if either operand is f64, exactly otherwise (i32 output for integer
// operands, checked for overflow; rational for rational operands).
Tensor direct_conv2d(const Tensor& x, const Tensor& w, Padding padding, int stride = 1);

// Output spatial extent for an input extent, kernel and stride.
std::int64_t conv_output_extent(std::int64_t in, std::int64_t k, Padding padding, int stride);

}  // namespace winowise::wino
