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

#include "winowise/perf_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "winowise/bit_growth.hpp"
#include "winowise/random.hpp"

namespace winowise::sim {

std::string_view to_string(Algo a) {
  switch (a) {
    case Algo::kIm2col: return "im2col";
    case Algo::kWinoF2: return "wino_f2";
    case Algo::kWinoF4: return "wino_f4";
  }
  return "?";
}

Algo parse_algo(std::string_view name) {
  if (name == "im2col") return Algo::kIm2col;
  if (name == "wino_f2" || name == "f2") return Algo::kWinoF2;
  if (name == "wino_f4" || name == "f4") return Algo::kWinoF4;
  throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected im2col|wino_f2|wino_f4)");
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kWeights: return "wt_transfer_xform";
    case Category::kIfmTransfer: return "ifm_transfer";
    case Category::kInputXform: return "input_xform";
    case Category::kCube: return "cube";
    case Category::kOutputXform: return "output_xform_vector";
    case Category::kOfmWrite: return "ofm_write";
  }
  return "?";
}

void SystemConfig::validate() const {
  if (num_cores < 1) throw ConfigError("num_cores must be >= 1");
  if (cube_m < 1 || cube_k < 1 || cube_n < 1) throw ConfigError("cube dimensions must be >= 1");
  if (!(gm_bandwidth > 0)) throw ConfigError("gm_bandwidth must be positive");
  if (gm_latency < 0 || gm_jitter_stddev < 0) throw ConfigError("latency and jitter must be >= 0");
  if (l0a_bytes <= 0 || l0b_bytes <= 0 || l0c_bytes <= 0 || l1_bytes <= 0) {
    throw ConfigError("memory sizes must be positive");
  }
  if (!(clock_mhz > 0)) throw ConfigError("clock_mhz must be positive");
  if (!(vector_bytes_per_cycle > 0)) throw ConfigError("vector_bytes_per_cycle must be positive");
}

void LayerShape::validate() const {
  if (batch < 1 || h < 1 || w < 1 || c_in < 1 || c_out < 1) {
    throw ShapeError("layer extents must all be >= 1");
  }
  if (kernel < 1 || kernel % 2 == 0) throw UnsupportedError("kernel size must be odd");
  if (stride != 1 && stride != 2) throw UnsupportedError("stride must be 1 or 2");
}

std::int64_t LayerShape::input_h() const {
  return padding == wino::Padding::kSame ? h * stride : (h - 1) * stride + kernel;
}
std::int64_t LayerShape::input_w() const {
  return padding == wino::Padding::kSame ? w * stride : (w - 1) * stride + kernel;
}

double LayerShape::macs() const {
  return static_cast<double>(batch) * static_cast<double>(h) * static_cast<double>(w) *
         static_cast<double>(kernel) * kernel * static_cast<double>(c_in) * static_cast<double>(c_out);
}

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

class Clock {
 public:
  Clock(const SystemConfig& cfg, bool jitter) : cfg_(cfg), rng_(cfg.seed), jitter_(jitter) {}

  double xfer(double bytes) const {
    return std::isinf(cfg_.gm_bandwidth) ? 0.0 : bytes / cfg_.gm_bandwidth;
  }
  double latency() {
    if (!jitter_ || cfg_.gm_jitter_stddev == 0) return cfg_.gm_latency;
    return std::max(0.0, cfg_.gm_latency + rng_.normal(0.0, cfg_.gm_jitter_stddev));
  }

 private:
  const SystemConfig& cfg_;
  Rng rng_;
  bool jitter_;
};

void charge(SimReport& r, Category c, double cycles) {
  r.critical[static_cast<std::size_t>(c)] += cycles;
  r.total_cycles += cycles;
}

// Unit that owns each critical-path category; both weight and iFM loads
// occupy MTE2.
constexpr const char* kCategoryUnit[kNumCategories] = {"MTE2", "MTE2", "MTE1_xform", "Cube", "OutXform", "MTE3"};

void finalize(SimReport& r, const SystemConfig& cfg) {
  std::map<std::string, double> per_unit;
  for (std::size_t i = 0; i < r.critical.size(); ++i) per_unit[kCategoryUnit[i]] += r.critical[i];
  r.bottleneck.clear();
  double top = -1;
  for (const auto& [unit, cyc] : per_unit) {
    if (cyc > top) {
      top = cyc;
      r.bottleneck = unit;
    }
  }
  r.macs_per_cycle = r.total_cycles > 0 ? r.layer.macs() / r.total_cycles : 0.0;
  r.energy_pj = energy_estimate(r, cfg);
}

struct WinoMapping {
  int group = 0;  // output channels per core per weight block
  int rows = 0;   // output rows per L1 tile
  int cols = 0;   // output cols per L1 tile
};

struct WinoContext {
  const LayerShape& s;
  const SystemConfig& cfg;
  int m, t, taps;
  std::int64_t hp, wp, cout_core;
  EngineRates in, out;
  int wt_cycles;
};

std::int64_t wino_l1_need(const WinoContext& c, const WinoMapping& mp) {
  return static_cast<std::int64_t>(c.taps) * c.s.c_in * mp.group +
         2 * (mp.rows + 2) * static_cast<std::int64_t>(mp.cols + 2) * c.s.c_in;
}

std::int64_t wino_l0c_need(const WinoContext& c, const WinoMapping& mp) {
  return 2LL * c.cfg.cube_m * c.taps * mp.group * 4;
}

SimReport run_wino(const WinoContext& c, const WinoMapping& mp, bool jitter) {
  const auto& s = c.s;
  const auto& cfg = c.cfg;
  Clock clk(cfg, jitter);
  SimReport r;
  r.algo = c.m == 2 ? Algo::kWinoF2 : Algo::kWinoF4;
  r.layer = s;
  r.cout_group = mp.group;
  r.strip_rows = mp.rows;
  r.strip_cols = mp.cols;
  const double cores = cfg.num_cores;
  const auto cin = s.c_in;
  const auto hin = s.input_h(), win = s.input_w();
  const std::int64_t off = s.padding == wino::Padding::kSame ? 1 : 0;
  const double ifm_copies = cfg.broadcast ? 1.0 : cores;

  const std::int64_t groups = ceil_div(c.cout_core, mp.group);
  for (std::int64_t gi = 0; gi < groups; ++gi) {
    const std::int64_t ge = std::min<std::int64_t>(mp.group, c.cout_core - gi * mp.group);

    // Weight block: GM -> L0B -> tap-by-tap transform -> L1, overlapped.
    const double wt_bytes = 9.0 * cin * ge * cores;
    const double wt_gm = clk.xfer(wt_bytes);
    const double per_core_rate = std::isinf(cfg.gm_bandwidth) ? std::numeric_limits<double>::infinity()
                                                              : cfg.gm_bandwidth / cores / 9.0;
    const std::int64_t kernels = cin * ge;
    const std::int64_t lanes =
        std::isinf(per_core_rate)
            ? kernels
            : std::min<std::int64_t>(kernels, std::max<std::int64_t>(
                                                  1, static_cast<std::int64_t>(std::ceil(c.wt_cycles * per_core_rate))));
    const double wt_xform = static_cast<double>(ceil_div(kernels, lanes)) * c.wt_cycles;
    charge(r, Category::kWeights, std::max(wt_gm, wt_xform) + clk.latency() + c.wt_cycles);
    r.busy["MTE2"] += wt_gm;
    r.busy["WtXform"] += wt_xform;
    r.bytes["GM_rd"] += wt_bytes;
    r.bytes["L0B_wr"] += wt_bytes;
    r.bytes["L0B_rd"] += wt_bytes;
    r.bytes["L1_wr"] += static_cast<double>(c.taps) * cin * ge * cores;
    r.traffic["GM_rd_weights"] += wt_bytes;
    r.traffic["L1_wr_weights"] += static_cast<double>(c.taps) * cin * ge * cores;

    // Streaming phase over L1 tiles.
    // Local sums; the report maps are only touched once per group.
    double acc_busy_MTE2 = 0;
    double acc_busy_MTE3 = 0;
    double acc_busy_MTE1_xform = 0;
    double acc_busy_Cube = 0;
    double acc_busy_OutXform = 0;
    double acc_busy_Vector = 0;
    double acc_bytes_GM_rd = 0;
    double acc_bytes_GM_wr = 0;
    double acc_bytes_L1_wr = 0;
    double acc_bytes_L1_rd = 0;
    double acc_bytes_L0A_wr = 0;
    double acc_bytes_L0A_rd = 0;
    double acc_bytes_L0C_A_rd = 0;
    double acc_bytes_L0C_A_wr = 0;
    double acc_bytes_L0C_B_rd = 0;
    double acc_traffic_GM_rd_ifm = 0;
    double acc_traffic_L1_rd_ifm = 0;
    double acc_traffic_ifm_tile_spatial = 0;
    bool first = true;
    double last_out = 0, last_ofm = 0;
    for (std::int64_t b = 0; b < s.batch; ++b)
      for (std::int64_t r0 = 0; r0 < c.hp; r0 += mp.rows) {
        const std::int64_t rows_p = std::min<std::int64_t>(mp.rows, c.hp - r0);
        const std::int64_t rows_v = std::min<std::int64_t>(rows_p, s.h - r0);
        const std::int64_t in_r0 = std::max<std::int64_t>(0, r0 - off);
        const std::int64_t in_r1 = std::min<std::int64_t>(hin, r0 - off + rows_p + 2);
        std::int64_t prev_hi = 0;
        for (std::int64_t c0 = 0; c0 < c.wp; c0 += mp.cols) {
          const std::int64_t cols_p = std::min<std::int64_t>(mp.cols, c.wp - c0);
          const std::int64_t cols_v = std::min<std::int64_t>(cols_p, s.w - c0);
          const std::int64_t in_c0 = std::max<std::int64_t>(std::max<std::int64_t>(0, c0 - off), prev_hi);
          const std::int64_t in_c1 = std::min<std::int64_t>(win, c0 - off + cols_p + 2);
          prev_hi = std::max(prev_hi, in_c1);
          const double ifm = static_cast<double>(std::max<std::int64_t>(0, in_r1 - in_r0)) *
                             static_cast<double>(std::max<std::int64_t>(0, in_c1 - in_c0)) * cin;
          const double ofm = static_cast<double>(rows_v * cols_v * ge) * cores;
          const std::int64_t tiles = (rows_p / c.m) * (cols_p / c.m);

          const double cube = static_cast<double>(c.taps) * ceil_div(tiles, cfg.cube_m) *
                              ceil_div(cin, cfg.cube_k) * ceil_div(ge, cfg.cube_n);
          const double in_x = static_cast<double>(ceil_div(tiles * cin, c.in.parallel_xforms)) *
                              c.in.cycles_per_xform;
          const double out_x = static_cast<double>(ceil_div(ge, c.out.parallel_xforms)) * tiles *
                               c.out.cycles_per_xform;
          const double vec = static_cast<double>(rows_v * cols_v * ge) / cfg.vector_bytes_per_cycle;
          const double gm_in = clk.xfer(ifm * ifm_copies);
          const double gm_out = clk.xfer(ofm);
          const double gm = gm_in + gm_out;

          if (first) {
            charge(r, Category::kIfmTransfer, clk.latency() + gm_in);
            const double fill = static_cast<double>(ceil_div(std::min<std::int64_t>(tiles, cfg.cube_m) * cin,
                                                             c.in.parallel_xforms)) *
                                c.in.cycles_per_xform;
            charge(r, Category::kInputXform, fill);
            first = false;
          }
          const double stage_out = out_x + vec;
          const double step = std::max({cube, in_x, stage_out, gm});
          if (step == cube) {
            charge(r, Category::kCube, step);
          } else if (step == in_x) {
            charge(r, Category::kInputXform, step);
          } else if (step == stage_out) {
            charge(r, Category::kOutputXform, step);
          } else {
            charge(r, Category::kIfmTransfer, step * gm_in / gm);
            charge(r, Category::kOfmWrite, step * gm_out / gm);
          }
          last_out = static_cast<double>(ceil_div(ge, c.out.parallel_xforms)) *
                         std::min<std::int64_t>(tiles, cfg.cube_m) * c.out.cycles_per_xform +
                     vec;
          last_ofm = gm_out;

          acc_busy_MTE2 += gm_in;
          acc_busy_MTE3 += gm_out;
          acc_busy_MTE1_xform += in_x;
          acc_busy_Cube += cube;
          acc_busy_OutXform += out_x;
          acc_busy_Vector += vec;

          const double ifm_taps = static_cast<double>(tiles) * c.taps * cin * cores;
          acc_bytes_GM_rd += ifm * ifm_copies;
          acc_bytes_GM_wr += ofm;
          acc_bytes_L1_wr += ifm * cores;
          acc_bytes_L1_rd += ifm_taps;
          acc_bytes_L0A_wr += ifm_taps;
          acc_bytes_L0A_rd += cube * cfg.cube_m * cfg.cube_k * cores;
          acc_bytes_L1_rd += cube * cfg.cube_k * cfg.cube_n * cores;  // weights feed the cube from L1
          acc_bytes_L0C_A_rd += cube * cfg.cube_m * cfg.cube_n * 4 * cores;
          acc_bytes_L0C_A_wr += cube * cfg.cube_m * cfg.cube_n * 4 * cores;
          acc_bytes_L0C_B_rd += static_cast<double>(tiles) * c.taps * ge * 4 * cores;
          acc_traffic_GM_rd_ifm += ifm * ifm_copies;
          acc_traffic_L1_rd_ifm += ifm_taps;
          acc_traffic_ifm_tile_spatial += static_cast<double>(tiles) * c.m * c.m * cin * cores;
        }
      }
    charge(r, Category::kOutputXform, last_out);
    r.busy["MTE2"] += acc_busy_MTE2;
    r.busy["MTE3"] += acc_busy_MTE3;
    r.busy["MTE1_xform"] += acc_busy_MTE1_xform;
    r.busy["Cube"] += acc_busy_Cube;
    r.busy["OutXform"] += acc_busy_OutXform;
    r.busy["Vector"] += acc_busy_Vector;
    r.bytes["GM_rd"] += acc_bytes_GM_rd;
    r.bytes["GM_wr"] += acc_bytes_GM_wr;
    r.bytes["L1_wr"] += acc_bytes_L1_wr;
    r.bytes["L1_rd"] += acc_bytes_L1_rd;
    r.bytes["L0A_wr"] += acc_bytes_L0A_wr;
    r.bytes["L0A_rd"] += acc_bytes_L0A_rd;
    r.bytes["L0C_A_rd"] += acc_bytes_L0C_A_rd;
    r.bytes["L0C_A_wr"] += acc_bytes_L0C_A_wr;
    r.bytes["L0C_B_rd"] += acc_bytes_L0C_B_rd;
    r.traffic["GM_rd_ifm"] += acc_traffic_GM_rd_ifm;
    r.traffic["L1_rd_ifm"] += acc_traffic_L1_rd_ifm;
    r.traffic["ifm_tile_spatial"] += acc_traffic_ifm_tile_spatial;
    charge(r, Category::kOfmWrite, clk.latency() + last_ofm);
  }
  finalize(r, cfg);
  return r;
}

}  // namespace

CseSchedule weight_schedule(int m) {
  static const CseSchedule f2 = tap_by_tap_schedule(wino::integer_form(wino::make_transform_set(2)).g);
  static const CseSchedule f4 = tap_by_tap_schedule(wino::integer_form(wino::make_transform_set(4)).g);
  if (m == 2) return f2;
  if (m == 4) return f4;
  throw UnsupportedError("unsupported Winograd tile size m=" + std::to_string(m));
}

SimReport wino_layer_sim(const LayerShape& shape, int m, const SystemConfig& cfg) {
  cfg.validate();
  shape.validate();
  if (m != 2 && m != 4) throw UnsupportedError("unsupported Winograd tile size m=" + std::to_string(m));
  if (shape.kernel != 3 || shape.stride != 1) {
    throw UnsupportedError("Winograd operator requires a 3x3 kernel with stride 1");
  }
  const int t = m + 2;
  const EngineRates in = xform_engine_rates({EngineKind::kRowByRowSlow, t, t, 32, 2, 1, 0});
  const EngineRates out = xform_engine_rates({EngineKind::kRowByRowFast, t, t, 16, 1, 1, 0});
  WinoContext c{shape,
                cfg,
                m,
                t,
                t * t,
                ceil_div(shape.h, m) * m,
                ceil_div(shape.w, m) * m,
                ceil_div(shape.c_out, cfg.num_cores),
                in,
                out,
                weight_schedule(m).cycles};

  // Candidate mappings: output-channel blocks and L1 tile extents.
  const int max_group = static_cast<int>(std::min<std::int64_t>(64, ceil_div(c.cout_core, 16) * 16));
  std::vector<int> groups;
  for (int g : {64, 32, 16})
    if (g <= max_group) groups.push_back(g);
  if (groups.empty()) groups.push_back(max_group);
  auto extents = [&](std::int64_t full) {
    std::vector<int> v;
    for (std::int64_t e : {full, std::int64_t{128}, std::int64_t{64}, std::int64_t{32}, std::int64_t{16},
                           std::int64_t{8}, std::int64_t{4}}) {
      if (e <= full && e % m == 0 && std::find(v.begin(), v.end(), e) == v.end()) v.push_back(static_cast<int>(e));
    }
    return v;
  };
  const auto row_opts = extents(std::min<std::int64_t>(c.hp, 16));
  const auto col_opts = extents(c.wp);

  std::optional<WinoMapping> best;
  double best_cycles = std::numeric_limits<double>::infinity();
  std::string why = "L1";
  std::int64_t smallest_l1 = std::numeric_limits<std::int64_t>::max();
  for (int g : groups)
    for (int rows : row_opts)
      for (int cols : col_opts) {
        const WinoMapping mp{g, rows, cols};
        if (wino_l0c_need(c, mp) > cfg.l0c_bytes) {
          why = "L0C";
          continue;
        }
        const auto need = wino_l1_need(c, mp);
        smallest_l1 = std::min(smallest_l1, need);
        if (need > cfg.l1_bytes) continue;
        const double cyc = run_wino(c, mp, false).total_cycles;
        if (cyc < best_cycles) {
          best_cycles = cyc;
          best = mp;
        }
      }
  if (!best) {
    if (why == "L0C" && smallest_l1 == std::numeric_limits<std::int64_t>::max()) {
      throw InfeasibleMappingError("L0C", "double-buffered Winograd accumulators need more than " +
                                              std::to_string(cfg.l0c_bytes) + " bytes");
    }
    throw InfeasibleMappingError("L1", "minimum mapping needs " + std::to_string(smallest_l1) +
                                           " bytes, L1 holds " + std::to_string(cfg.l1_bytes));
  }
  return run_wino(c, *best, true);
}

SimReport im2col_layer_sim(const LayerShape& s, const SystemConfig& cfg) {
  cfg.validate();
  s.validate();
  Clock clk(cfg, true);
  SimReport r;
  r.algo = Algo::kIm2col;
  r.layer = s;
  const double cores = cfg.num_cores;
  const std::int64_t cout_core = ceil_div(s.c_out, cfg.num_cores);
  const std::int64_t k_dim = static_cast<std::int64_t>(s.kernel) * s.kernel * s.c_in;
  const std::int64_t pixels = s.batch * s.h * s.w;

  // Weight block per core sized to half of L1; the other half holds iFMs.
  std::int64_t block = ceil_div(cout_core, 16) * 16;
  while (block > 16 && k_dim * block > cfg.l1_bytes / 2) block -= 16;
  if (k_dim * std::min(block, cout_core) > cfg.l1_bytes / 2) {
    throw InfeasibleMappingError("L1", "a 16-channel weight block needs " + std::to_string(k_dim * 16) +
                                           " bytes, half of L1 is " + std::to_string(cfg.l1_bytes / 2));
  }
  const std::int64_t passes = ceil_div(cout_core, block);
  double cube = 0;
  for (std::int64_t p = 0; p < passes; ++p) {
    const auto cb = std::min(block, cout_core - p * block);
    cube += static_cast<double>(ceil_div(pixels, cfg.cube_m)) * ceil_div(k_dim, cfg.cube_k) *
            ceil_div(cb, cfg.cube_n);
  }
  const double ifm_copies = cfg.broadcast ? 1.0 : cores;
  const double wt_bytes = static_cast<double>(k_dim) * s.c_out;
  const double ifm_bytes = static_cast<double>(s.batch * s.input_h() * s.input_w() * s.c_in) * passes * ifm_copies;
  const double ofm_bytes = static_cast<double>(pixels) * s.c_out;
  const double gm_w = clk.xfer(wt_bytes), gm_i = clk.xfer(ifm_bytes), gm_o = clk.xfer(ofm_bytes);
  const double gm = gm_w + gm_i + gm_o;

  // Prologue: first weight block and first input rows before the cube starts.
  const double first_rows = std::min<double>(static_cast<double>(s.batch * s.input_h()),
                                             static_cast<double>(cfg.cube_m + s.kernel - 1));
  charge(r, Category::kWeights, clk.latency() + clk.xfer(static_cast<double>(k_dim * std::min(block, cout_core)) * cores));
  charge(r, Category::kIfmTransfer, clk.xfer(first_rows * static_cast<double>(s.input_w() * s.c_in)));
  if (cube >= gm) {
    charge(r, Category::kCube, cube);
  } else {
    charge(r, Category::kWeights, gm_w);
    charge(r, Category::kIfmTransfer, gm_i);
    charge(r, Category::kOfmWrite, gm_o);
  }
  charge(r, Category::kOfmWrite, clk.latency());

  r.busy["MTE2"] = gm_w + gm_i;
  r.busy["MTE3"] = gm_o;
  r.busy["Cube"] = cube;
  r.busy["Im2col"] = cube;
  r.busy["Vector"] = static_cast<double>(pixels * s.c_out) / (cores * cfg.vector_bytes_per_cycle);
  r.bytes["GM_rd"] = wt_bytes + ifm_bytes;
  r.bytes["GM_wr"] = ofm_bytes;
  r.bytes["L1_wr"] = wt_bytes + ifm_bytes / ifm_copies * cores;
  r.bytes["L1_rd"] = static_cast<double>(pixels) * k_dim * passes * cores;
  r.bytes["L0A_wr"] = r.bytes["L1_rd"];
  r.bytes["L0A_rd"] = cube * cfg.cube_m * cfg.cube_k * cores;
  r.bytes["L0B_wr"] = wt_bytes;
  r.bytes["L0B_rd"] = cube * cfg.cube_k * cfg.cube_n * cores;
  r.bytes["L0C_A_rd"] = cube * cfg.cube_m * cfg.cube_n * 4 * cores;
  r.bytes["L0C_A_wr"] = cube * cfg.cube_m * cfg.cube_n * 4 * cores;
  r.bytes["L0C_B_rd"] = static_cast<double>(pixels * s.c_out) * 4;
  r.traffic["GM_rd_weights"] = wt_bytes;
  r.traffic["GM_rd_ifm"] = ifm_bytes;
  r.cout_group = static_cast<int>(block);
  finalize(r, cfg);
  return r;
}

double speedup(const LayerShape& shape, int m, const SystemConfig& cfg) {
  return im2col_layer_sim(shape, cfg).total_cycles / wino_layer_sim(shape, m, cfg).total_cycles;
}

SimReport simulate(const LayerShape& shape, Algo algo, const SystemConfig& cfg) {
  switch (algo) {
    case Algo::kIm2col: return im2col_layer_sim(shape, cfg);
    case Algo::kWinoF2: return wino_layer_sim(shape, 2, cfg);
    case Algo::kWinoF4: return wino_layer_sim(shape, 4, cfg);
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace winowise::sim
