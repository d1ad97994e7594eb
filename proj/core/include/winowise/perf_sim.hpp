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

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "winowise/conv.hpp"
#include "winowise/engines.hpp"

namespace winowise::sim {

// Per-access memory costs (pJ/B) and unit powers (mW).
struct EnergyTable {
  double l0a_rd = 0.22, l0a_wr = 0.24;
  double l0b_rd = 0.22, l0b_wr = 0.24;
  double l0c_a_rd = 0.23, l0c_a_wr = 0.29;
  double l0c_b_rd_im2col = 0.31, l0c_b_rd_wino = 0.69;
  double l1_rd = 0.92, l1_wr = 0.68;
  double gm_rd = 0.0, gm_wr = 0.0;
  double cube_im2col_mw = 1521, cube_wino_mw = 1923;
  double in_xform_mw = 145, wt_xform_mw = 228, out_xform_mw = 114, im2col_engine_mw = 30;
};

struct SystemConfig {
  int num_cores = 2;
  int cube_m = 16, cube_k = 32, cube_n = 16;
  double gm_bandwidth = 81.2;  // B/cycle; +inf disables the transfer cost
  double gm_latency = 150;     // cycles
  double gm_jitter_stddev = 2.2360679774997896;  // sqrt(5)
  std::uint64_t seed = 0;
  std::int64_t l0a_bytes = 64 * 1024;
  std::int64_t l0b_bytes = 64 * 1024;
  std::int64_t l0c_bytes = 288 * 1024;
  std::int64_t l1_bytes = 1248 * 1024;
  double clock_mhz = 500;
  bool broadcast = true;
  // Vector-unit requantization rate on the output path.
  double vector_bytes_per_cycle = 128;
  EnergyTable energy;

  std::int64_t macs_per_cycle() const {
    return static_cast<std::int64_t>(cube_m) * cube_k * cube_n;
  }
  void validate() const;
};

struct LayerShape {
  std::int64_t batch = 1;
  std::int64_t h = 1;  // output height
  std::int64_t w = 1;  // output width
  std::int64_t c_in = 1;
  std::int64_t c_out = 1;
  int kernel = 3;
  int stride = 1;
  wino::Padding padding = wino::Padding::kSame;

  void validate() const;
  std::int64_t input_h() const;
  std::int64_t input_w() const;
  // Spatial multiply-accumulates of the layer.
  double macs() const;
};

enum class Algo { kIm2col, kWinoF2, kWinoF4 };
std::string_view to_string(Algo a);
Algo parse_algo(std::string_view name);

// Critical-path categories of the cycle breakdown.
enum class Category { kWeights, kIfmTransfer, kInputXform, kCube, kOutputXform, kOfmWrite };
inline constexpr int kNumCategories = 6;
std::string_view to_string(Category c);

struct SimReport {
  Algo algo = Algo::kIm2col;
  LayerShape layer;
  double total_cycles = 0;
  // Busy cycles per unit. MTE2 and MTE3 are the shared GM read and write
  // channels; MTE1_xform, Cube, OutXform, Vector, WtXform and Im2col are
  // per core (all cores do the same work).
  std::map<std::string, double> busy;
  // Bytes per memory port, summed over cores. These keys drive the energy
  // estimate.
  std::map<std::string, double> bytes;
  // Finer traffic accounting (subsets of `bytes`), e.g. GM_rd_weights.
  std::map<std::string, double> traffic;
  // Critical-path cycles per category; sums to total_cycles.
  std::array<double, kNumCategories> critical{};
  std::string bottleneck;  // unit with the largest critical-path share
  double energy_pj = 0;
  double macs_per_cycle = 0;  // spatial-equivalent MACs over total cycles

  // Mapping parameters chosen by the scheduler.
  int cout_group = 0;
  int strip_rows = 0;
  int strip_cols = 0;
};

// Winograd F_m operator (m = 2 or 4). Throws InfeasibleMappingError if no
// double-buffered mapping fits L1 or L0C.
SimReport wino_layer_sim(const LayerShape& shape, int m, const SystemConfig& cfg);

// im2col + MatMul baseline; supports odd kernels and stride 1 or 2.
SimReport im2col_layer_sim(const LayerShape& shape, const SystemConfig& cfg);

// im2col cycles over Winograd cycles.
double speedup(const LayerShape& shape, int m, const SystemConfig& cfg);

SimReport simulate(const LayerShape& shape, Algo algo, const SystemConfig& cfg);

// Energy of a report in pJ under cfg's table; also stored in the report by
// the simulators.
double energy_estimate(const SimReport& report, const SystemConfig& cfg);

// Critical-path share per category, in percent of total cycles.
std::array<double, kNumCategories> breakdown(const SimReport& report);

// The tap-by-tap weight-transform schedule used for F_m.
CseSchedule weight_schedule(int m);

}  // namespace winowise::sim
