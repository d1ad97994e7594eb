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

#include "json.hpp"

#include "winowise/tensor.hpp"
#include "winowise/transforms.hpp"

namespace winowise::quant {

// Partition of the weights into independently scaled units.
enum class Granularity { kLayer, kChannel, kTap, kChannelAndTap };
enum class Domain { kSpatial, kWinograd };

std::string_view to_string(Granularity g);
std::string_view to_string(Domain d);
Granularity parse_granularity(std::string_view name);
Domain parse_domain(std::string_view name);

struct UnitStats {
  double gamma = 0;  // 0 for units that need no search (all zero or constant)
  double sigma = 0;
  double mu = 0;
};

struct ErrorReport {
  Granularity strategy = Granularity::kLayer;
  Domain domain = Domain::kSpatial;
  int n = 8;
  // Mean of |Q(f) - f| / |f| over non-zero spatial weights, and its log2
  // (-inf when the mean is exactly zero).
  double mean_rel_error = 0;
  double mean_log2_rel_error = 0;
  std::vector<UnitStats> units;
};

// Offset quantizer mu + s * clamp(round((x - mu) / s)) at n bits.
double quant_offset(double x, double mu, double s, int n);

inline constexpr double kGammaMin = 0.5;
inline constexpr double kGammaMax = 8.0;
inline constexpr double kGammaStep = 0.01;

// weights: (C_out, C_in, 3, 3) any dtype. For each unit, gamma is searched on
// [0.5, 8] in steps of 0.01 with s = gamma * sigma / 2^(n-1), minimizing the
// summed relative error of the spatial weights when that unit alone is
// quantized. Winograd-domain weights are G f G^T; quantized values are mapped
// back with pinv(G) (.) pinv(G)^T before the spatial error is measured. All
// units are then quantized together for the reported error. `ts` is required
// for the Winograd domain.
ErrorReport quant_error_report(const Tensor& weights, Granularity strategy, Domain domain, int n,
                               const wino::TransformSet* ts = nullptr);

void to_json(nlohmann::json& j, const ErrorReport& r);
// Inverse of to_json; a null mean_log2_rel_error reads back as -inf.
void from_json(const nlohmann::json& j, ErrorReport& r);

}  // namespace winowise::quant
