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

#include <string>
#include <vector>

#include "winowise/perf_sim.hpp"

namespace winowise::sim {

struct NetworkLayer {
  std::string name;
  LayerShape shape;
  // Empty means every algorithm; Winograd is dropped for layers that are not
  // 3x3 stride 1 regardless.
  std::vector<Algo> eligible;
};

struct LayerChoice {
  std::string name;
  LayerShape shape;
  Algo algo = Algo::kIm2col;
  double cycles = 0;
  double energy_pj = 0;
  double im2col_cycles = 0;
  double im2col_energy_pj = 0;
  // Cycles of every algorithm that produced a feasible mapping.
  std::vector<std::pair<Algo, double>> candidates;
};

struct NetworkReport {
  std::vector<LayerChoice> layers;
  double total_cycles = 0;
  double energy_pj = 0;
  double im2col_cycles = 0;
  double im2col_energy_pj = 0;

  // End-to-end im2col cycles over chosen-kernel cycles (1 when empty).
  double speedup() const { return total_cycles > 0 ? im2col_cycles / total_cycles : 1.0; }
};

NetworkReport network_sim(const std::vector<NetworkLayer>& layers, const SystemConfig& cfg);

// The 3x3 / stride 1 / same-padding grid of the throughput study:
// batch {1, 8} x resolution {16, 32, 64, 128} x nine (C_in, C_out) pairs.
std::vector<LayerShape> throughput_grid();

}  // namespace winowise::sim
