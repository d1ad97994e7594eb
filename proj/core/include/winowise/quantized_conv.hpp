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
#include <vector>

#include "winowise/conv.hpp"
#include "winowise/quant.hpp"

namespace winowise::quant {

// How Winograd-domain values are divided by their tap scales before
// rounding. kShift requires power-of-two scales and uses integer shifts;
// kDivision divides in double precision.
enum class RescaleBackend { kDivision, kShift };

enum class ScaleStrategy { kUniform, kTapwise, kTapwisePow2 };
std::string_view to_string(ScaleStrategy s);
ScaleStrategy parse_scale_strategy(std::string_view name);

// Tap scales apply to the integer-form transforms (row-factored BT and G, see
// wino::integer_form), so unit scales with b = 32 make quantization lossless.
//
// x: integer NCHW/FRACTAL activations, w: integer (C_out, C_in, 3, 3).
// Winograd-domain products accumulate in int32; an overflow throws.
// Output is f64 in x's layout.
Tensor quantized_winograd_conv2d(const Tensor& x, const Tensor& w, const wino::TransformSet& ts,
                                 const TapScaleMatrix& sb, const TapScaleMatrix& sg, int b,
                                 wino::Padding padding,
                                 RescaleBackend backend = RescaleBackend::kDivision);

// q = clamp(round(v / 2^shift)) computed with integer shifts only.
std::int64_t quantize_shift(std::int64_t v, int shift, int bits);

// Integer-form Winograd-domain tiles for every (n, c_in, tile) of x, t*t each.
std::vector<double> input_tap_tiles(const Tensor& x, const wino::TransformSet& ts,
                                    wino::Padding padding);
// Integer-form Winograd-domain weights for every (c_out, c_in), t*t each.
std::vector<double> weight_tap_tiles(const Tensor& w, const wino::TransformSet& ts);

struct CalibratedScales {
  TapScaleMatrix sb;
  TapScaleMatrix sg;
};

// One-shot calibration of S_B from x and S_G from w at b bits.
CalibratedScales calibrate_scales(const Tensor& x, const Tensor& w, const wino::TransformSet& ts,
                                  int b, ScaleStrategy strategy, wino::Padding padding);

// Scales derived from already collected maxima.
TapScaleMatrix scales_for_strategy(const CalibState& state, int b, ScaleStrategy strategy,
                                   ScaleRole role);

}  // namespace winowise::quant
