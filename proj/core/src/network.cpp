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

#include "winowise/network.hpp"

#include <algorithm>

namespace winowise::sim {

NetworkReport network_sim(const std::vector<NetworkLayer>& layers, const SystemConfig& cfg) {
  NetworkReport rep;
  for (const auto& layer : layers) {
    std::vector<Algo> algos = layer.eligible;
    if (algos.empty()) algos = {Algo::kIm2col, Algo::kWinoF2, Algo::kWinoF4};
    const bool wino_ok = layer.shape.kernel == 3 && layer.shape.stride == 1;
    algos.erase(std::remove_if(algos.begin(), algos.end(),
                               [&](Algo a) { return a != Algo::kIm2col && !wino_ok; }),
                algos.end());

    LayerChoice choice;
    choice.name = layer.name;
    choice.shape = layer.shape;
    const auto base = im2col_layer_sim(layer.shape, cfg);
    choice.im2col_cycles = base.total_cycles;
    choice.im2col_energy_pj = base.energy_pj;
    bool have = false;
    for (Algo a : algos) {
      SimReport r;
      try {
        r = a == Algo::kIm2col ? base : simulate(layer.shape, a, cfg);
      } catch (const InfeasibleMappingError&) {
        continue;
      }
      choice.candidates.emplace_back(a, r.total_cycles);
      if (!have || r.total_cycles < choice.cycles) {
        have = true;
        choice.algo = a;
        choice.cycles = r.total_cycles;
        choice.energy_pj = r.energy_pj;
      }
    }
    if (!have) {
      throw InfeasibleMappingError("L1", "no eligible algorithm maps layer '" + layer.name + "'");
    }
    rep.total_cycles += choice.cycles;
    rep.energy_pj += choice.energy_pj;
    rep.im2col_cycles += choice.im2col_cycles;
    rep.im2col_energy_pj += choice.im2col_energy_pj;
    rep.layers.push_back(std::move(choice));
  }
  return rep;
}

std::vector<LayerShape> throughput_grid() {
  static constexpr std::pair<int, int> kChannels[] = {{64, 64},   {64, 128},  {128, 128},
                                                      {128, 192}, {128, 256}, {192, 384},
                                                      {256, 256}, {256, 512}, {512, 512}};
  std::vector<LayerShape> grid;
  for (int b : {1, 8})
    for (int hw : {16, 32, 64, 128})
      for (const auto& [cin, cout] : kChannels) {
        LayerShape s;
        s.batch = b;
        s.h = s.w = hw;
        s.c_in = cin;
        s.c_out = cout;
        grid.push_back(s);
      }
  return grid;
}

}  // namespace winowise::sim
