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

#include <numeric>

#include "winowise/perf_sim.hpp"

namespace winowise::sim {

namespace {

double get(const std::map<std::string, double>& m, const char* key) {
  const auto it = m.find(key);
  return it == m.end() ? 0.0 : it->second;
}

}  // namespace

double energy_estimate(const SimReport& r, const SystemConfig& cfg) {
  const auto& e = cfg.energy;
  const bool wino = r.algo != Algo::kIm2col;
  const auto& b = r.bytes;
  double pj = get(b, "L0A_rd") * e.l0a_rd + get(b, "L0A_wr") * e.l0a_wr +
              get(b, "L0B_rd") * e.l0b_rd + get(b, "L0B_wr") * e.l0b_wr +
              get(b, "L0C_A_rd") * e.l0c_a_rd + get(b, "L0C_A_wr") * e.l0c_a_wr +
              get(b, "L0C_B_rd") * (wino ? e.l0c_b_rd_wino : e.l0c_b_rd_im2col) +
              get(b, "L1_rd") * e.l1_rd + get(b, "L1_wr") * e.l1_wr + get(b, "GM_rd") * e.gm_rd +
              get(b, "GM_wr") * e.gm_wr;
  // mW for one cycle at clock_mhz, in pJ.
  const double pj_per_mw_cycle = 1e3 / cfg.clock_mhz;
  const auto& u = r.busy;
  const double unit_mw_cycles = get(u, "Cube") * (wino ? e.cube_wino_mw : e.cube_im2col_mw) +
                                get(u, "MTE1_xform") * e.in_xform_mw +
                                get(u, "WtXform") * e.wt_xform_mw +
                                get(u, "OutXform") * e.out_xform_mw +
                                get(u, "Im2col") * e.im2col_engine_mw;
  // Busy cycles are per core; every core runs its own copy of these units.
  pj += unit_mw_cycles * pj_per_mw_cycle * cfg.num_cores;
  return pj;
}

std::array<double, kNumCategories> breakdown(const SimReport& r) {
  std::array<double, kNumCategories> pct{};
  const double total = std::accumulate(r.critical.begin(), r.critical.end(), 0.0);
  if (total <= 0) return pct;
  for (std::size_t i = 0; i < pct.size(); ++i) pct[i] = 100.0 * r.critical[i] / total;
  return pct;
}

}  // namespace winowise::sim
