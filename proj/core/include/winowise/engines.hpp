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
#include <string_view>

#include "winowise/matrix.hpp"

namespace winowise::sim {

enum class EngineKind { kRowByRowSlow, kRowByRowFast, kTapByTap };
std::string_view to_string(EngineKind k);

// h_T x w_T is the transform matrix T of s_w = T^T s T.
struct EngineSpec {
  EngineKind kind = EngineKind::kRowByRowSlow;
  int h_t = 6;
  int w_t = 6;
  int p_c = 1;
  int p_s = 1;
  int p_t = 1;
  // Cycles of one tap-by-tap transform; ignored by the row-by-row kinds.
  int cycles_per_xform = 0;
};

struct EngineRates {
  int cycles_per_xform = 0;
  int parallel_xforms = 0;
  double rd_bw = 0;  // B/cycle
  double wr_bw = 0;  // B/cycle
};

EngineRates xform_engine_rates(const EngineSpec& spec);

// Shift-add schedule length of the 2-D transform T (x) T applied by a
// tap-by-tap PE (one shifter, one adder, one accumulator). Each output tap is
// a signed sum of shifted inputs; a term costs one cycle per set bit of its
// coefficient. Common pairs of terms are shared greedily: the most frequent
// pair across taps becomes an intermediate node until no pair repeats.
struct CseSchedule {
  int cycles = 0;         // after sharing
  int naive_cycles = 0;   // without sharing
  int shared_nodes = 0;
  int taps = 0;
};
CseSchedule tap_by_tap_schedule(const Matrix<std::int64_t>& t);

}  // namespace winowise::sim
