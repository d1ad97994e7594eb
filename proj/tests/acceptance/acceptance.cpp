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

// Acceptance run: one [PASS]/[FAIL] line per criterion. With an argument N,
// only criterion N runs. Exit status is non-zero if any selected criterion
// fails.

#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "winowise/bit_growth.hpp"
#include "winowise/error_report.hpp"
#include "winowise/linalg.hpp"
#include "winowise/network.hpp"
#include "winowise/quantized_conv.hpp"
#include "winowise/sim_io.hpp"
#include "winowise/tensor_io.hpp"
#include "winowise_cli/commands.hpp"

using namespace winowise;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_rel(const std::vector<double>& a, const std::vector<double>& ref) {
  double d = 0, r = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - ref[i]));
    r = std::max(r, std::abs(ref[i]));
  }
  return r > 0 ? d / r : d;
}

// ------------------------------------------------------------------ 1

Outcome exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  int basis = 0, layers = 0;
  double worst_float = 0;
  for (int m : {2, 4}) {
    const auto ts = wino::make_transform_set(m);
    if (!wino::validate_transform_set(ts)) {
      o.pass = false;
      o.detail += fmt::format("F{} set invalid; ", m);
    }
    // Every one-hot tile against every one-hot filter.
    for (int p = 0; p < ts.t * ts.t; ++p)
      for (int q = 0; q < 9; ++q) {
        std::vector<std::int8_t> xv(static_cast<std::size_t>(ts.t * ts.t)), wv(9);
        xv[static_cast<std::size_t>(p)] = 1;
        wv[static_cast<std::size_t>(q)] = 1;
        const Tensor x({1, 1, ts.t, ts.t}, Layout::kNCHW, std::move(xv));
        const Tensor w({1, 1, 3, 3}, Layout::kNCHW, std::move(wv));
        const auto y = wino::winograd_conv2d(x, w, ts, wino::Padding::kValid, wino::ArithMode::kExact);
        if (!(y == wino::direct_conv2d(x, w, wino::Padding::kValid))) o.pass = false;
        ++basis;
      }
    Rng rng(1000 + static_cast<std::uint64_t>(m));
    for (int i = 0; i < 50; ++i) {
      const std::int64_t cin = rng.uniform_int(1, 64), cout = rng.uniform_int(1, 64);
      const std::int64_t h = rng.uniform_int(3, 32), w = rng.uniform_int(3, 32);
      const auto pad = rng.uniform_int(0, 1) ? wino::Padding::kSame : wino::Padding::kValid;
      const auto x = oracle::tensor_i8({1, cin, h, w}, rng);
      const auto k = oracle::tensor_i8({cout, cin, 3, 3}, rng);
      const auto y = wino::winograd_conv2d(x, k, ts, pad, wino::ArithMode::kExact);
      // Independent scatter-form oracle, then the library's direct route.
      const auto ref = oracle::scatter_conv(oracle::from_tensor<std::int64_t>(x), oracle::from_tensor<std::int64_t>(k),
                                            pad == wino::Padding::kSame ? 1 : 0);
      bool ok = static_cast<std::size_t>(y.numel()) == ref.v.size();
      for (std::size_t j = 0; ok && j < ref.v.size(); ++j) ok = y.as_double(static_cast<std::int64_t>(j)) == ref.v[j];
      ok = ok && y == wino::direct_conv2d(x, k, pad);
      if (!ok) {
        o.pass = false;
        o.detail += fmt::format("F{} layer {} mismatch; ", m, i);
      }
      ++layers;
    }
    for (int i = 0; i < 10; ++i) {
      const std::int64_t cin = rng.uniform_int(1, 64), cout = rng.uniform_int(1, 64);
      const auto x = oracle::tensor_f64({1, cin, 32, 32}, rng, -1, 1);
      const auto k = oracle::tensor_f64({cout, cin, 3, 3}, rng, -1, 1);
      const auto y = wino::winograd_conv2d(x, k, ts, wino::Padding::kSame, wino::ArithMode::kFloat);
      worst_float = std::max(
          worst_float, max_rel(y.to_f64_vector(), wino::direct_conv2d(x, k, wino::Padding::kSame).to_f64_vector()));
    }
  }
  const double secs = seconds_since(t0);
  o.pass = o.pass && worst_float <= 1e-9 && secs < 60;
  o.detail += fmt::format("{} basis pairs, {} random layers exact; float max rel {:.2e}; {:.1f} s", basis, layers,
                          worst_float, secs);
  return o;
}

// ------------------------------------------------------------------ 2

Outcome bit_growth() {
  Outcome o;
  struct Want {
    int m;
    int stage;
    int bits;
    const char* name;
  };
  const Want wants[] = {{2, 0, 2, "F2 input"}, {2, 1, 3, "F2 weight"}, {4, 1, 10, "F4 weight"},
                        {4, 0, 8, "F4 input"}, {4, 2, 8, "F4 output"}};
  for (const auto& w : wants) {
    const auto ts = wino::make_transform_set(w.m);
    const Matrix<Rational>* mats[] = {&ts.bt, &ts.g, &ts.at};
    const int got = wino::bit_growth(wino::integer_scaled(*mats[w.stage]), 8);
    if (got != w.bits) o.pass = false;
    o.detail += fmt::format("{} {} (want {}); ", w.name, got, w.bits);
  }
  int checked = 0;
  for (int m : {2, 4}) {
    const auto ts = wino::make_transform_set(m);
    for (const auto* mat : {&ts.bt, &ts.g, &ts.at})
      for (int n : {2, 3}) {
        const auto t = wino::integer_scaled(*mat);
        if (wino::bit_growth(t, n) != oracle::exhaustive_growth(t, n)) o.pass = false;
        ++checked;
      }
  }
  o.detail += fmt::format("exhaustive search agrees on {}/12 cases checked", checked);
  return o;
}

// ------------------------------------------------------------------ 3

Outcome mac_reduction() {
  Outcome o;
  for (int m : {2, 4}) {
    const auto ts = wino::make_transform_set(m);
    const auto c = wino::count_tile_macs(ts);
    const double want = m == 2 ? 2.25 : 4.0;
    // Direct: 9 per output pixel; Winograd: one product per tap.
    const bool ok = c.reduction() == want && c.direct == 9LL * m * m && c.winograd == static_cast<std::int64_t>(ts.t) * ts.t;
    o.pass = o.pass && ok;
    o.detail += fmt::format("{}F{} {}/{} = {}", m == 2 ? "" : "; ", m, c.direct, c.winograd, c.reduction());
  }
  return o;
}

// ------------------------------------------------------------------ 4

Outcome pow2_path() {
  Outcome o;
  Rng rng(4000);
  for (int m : {2, 4}) {
    const auto ts = wino::make_transform_set(m);
    int tiles = 0, runs = 0;
    while (tiles < 1000) {
      // 100 tiles per run: 10 x 10 tile grid, fresh scales and bit width.
      const auto x = oracle::tensor_i8({1, 4, 10 * m, 10 * m}, rng);
      const auto w = oracle::tensor_i8({3, 4, 3, 3}, rng);
      std::vector<double> sb(static_cast<std::size_t>(ts.t * ts.t)), sg(sb.size());
      for (auto& v : sb) v = std::ldexp(1.0, static_cast<int>(rng.uniform_int(-2, 10)));
      for (auto& v : sg) v = std::ldexp(1.0, static_cast<int>(rng.uniform_int(-2, 12)));
      const quant::TapScaleMatrix SB(ts.t, sb, quant::ScaleRole::kSB, true);
      const quant::TapScaleMatrix SG(ts.t, sg, quant::ScaleRole::kSG, true);
      const int b = static_cast<int>(rng.uniform_int(6, 12));
      const auto pad = runs % 2 ? wino::Padding::kSame : wino::Padding::kValid;
      const auto yd = quant::quantized_winograd_conv2d(x, w, ts, SB, SG, b, pad, quant::RescaleBackend::kDivision);
      const auto ys = quant::quantized_winograd_conv2d(x, w, ts, SB, SG, b, pad, quant::RescaleBackend::kShift);
      if (!(yd == ys)) o.pass = false;
      tiles += pad == wino::Padding::kSame ? 100 : ((10 * m - 2 + m - 1) / m) * ((10 * m - 2 + m - 1) / m);
      ++runs;
    }
    o.detail += fmt::format("F{} {} tiles in {} runs; ", m, tiles, runs);
  }
  o.detail += o.pass ? "bit-identical" : "mismatch";
  return o;
}

// ------------------------------------------------------------------ 5

double weighted_log2(const std::vector<Tensor>& layers, quant::Granularity g, quant::Domain d,
                     const wino::TransformSet& ts) {
  double sum = 0, count = 0;
  for (const auto& w : layers) {
    const auto r = quant::quant_error_report(w, g, d, 8, &ts);
    double nz = 0;
    for (double v : w.to_f64_vector()) nz += v != 0;
    sum += r.mean_rel_error * nz;
    count += nz;
  }
  return std::log2(sum / count);
}

// Synthetic ensemble: Gaussian kernels whose Winograd tap (i, j) carries an
// extra 2^(i+j), mapped back to spatial weights with pinv(G).
Tensor tap_scaled_weights(std::int64_t cout, std::int64_t cin, Rng& rng) {
  const auto ts = wino::make_transform_set(4);
  const auto g = to_double(ts.g);
  const auto gp = pseudo_inverse(g);
  std::vector<double> f(static_cast<std::size_t>(cout * cin * 9));
  for (std::int64_t p = 0; p < cout * cin; ++p) {
    Matrix<double> k(3, 3);
    for (int i = 0; i < 9; ++i) k(i / 3, i % 3) = rng.normal(0, 0.05);
    auto u = matmul(matmul(g, k), g.transposed());
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) u(i, j) *= std::ldexp(1.0, i + j);
    const auto back = matmul(matmul(gp, u), gp.transposed());
    for (int i = 0; i < 9; ++i) f[static_cast<std::size_t>(p * 9 + i)] = back(i / 3, i % 3);
  }
  return Tensor({cout, cin, 3, 3}, Layout::kNCHW, std::move(f));
}

Outcome error_ordering() {
  Outcome o;
  const auto ts = wino::make_transform_set(4);
  Rng rng(5000);
  using G = quant::Granularity;
  const auto wd = quant::Domain::kWinograd;
  for (int e = 0; e < 3; ++e) {
    const auto w = tap_scaled_weights(16, 16, rng);
    const double layer = quant::quant_error_report(w, G::kLayer, wd, 8, &ts).mean_log2_rel_error;
    const double tap = quant::quant_error_report(w, G::kTap, wd, 8, &ts).mean_log2_rel_error;
    const double both = quant::quant_error_report(w, G::kChannelAndTap, wd, 8, &ts).mean_log2_rel_error;
    o.pass = o.pass && tap <= layer - 1.0 && both <= tap;
    o.detail += fmt::format("ensemble {}: layer {:.2f}, tap {:.2f}, channel&tap {:.2f}; ", e, layer, tap, both);
  }

  const char* dir = std::getenv("WINOWISE_RESNET34_WEIGHTS");
  if (dir == nullptr || !fs::is_directory(dir)) {
    o.detail += "real-weight check skipped (set WINOWISE_RESNET34_WEIGHTS to a directory of 3x3 weight tensors)";
    return o;
  }
  std::vector<Tensor> layers;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".wtns") continue;
    auto t = read_tensor(entry.path());
    if (t.shape().size() == 4 && t.dim(2) == 3 && t.dim(3) == 3) layers.push_back(std::move(t));
  }
  struct Ref {
    G g;
    quant::Domain d;
    double log2;
  };
  const Ref refs[] = {{G::kLayer, quant::Domain::kSpatial, -6.01},
                      {G::kChannel, quant::Domain::kSpatial, -6.72},
                      {G::kLayer, wd, -5.58},
                      {G::kTap, wd, -6.78}};
  o.detail += fmt::format("{} real layers:", layers.size());
  for (const auto& r : refs) {
    const double got = layers.empty() ? NAN : weighted_log2(layers, r.g, r.d, ts);
    o.pass = o.pass && std::abs(got - r.log2) <= 0.3;
    o.detail += fmt::format(" {}/{} {:.2f} (ref {:.2f})", quant::to_string(r.d), quant::to_string(r.g), got, r.log2);
  }
  return o;
}

// ------------------------------------------------------------------ 6

double fake_quant(double x, double u, int b) {
  const double s = std::exp2(u);
  const double q = std::clamp(std::round(x / s), static_cast<double>(quant::qmin(b)), static_cast<double>(quant::qmax(b)));
  return s * q;
}

Outcome ste() {
  Outcome o;
  Rng rng(6000);
  const double h = 1e-5;
  double worst = 0;
  int above = 0, below = 0;
  for (int i = 0; i < 1000; ++i) {
    const int b = static_cast<int>(rng.uniform_int(2, 16));
    const double t = std::exp2(rng.uniform(-12, 12));
    const double s = quant::pow2_ceil(t);
    const bool up = rng.uniform() < 0.5;
    const double v = up ? quant::qmax(b) + 1 + rng.uniform(0, 1000) : quant::qmin(b) - 1 - rng.uniform(0, 1000);
    (up ? above : below)++;
    const double x = v * s;
    const double fd = (fake_quant(x, std::log2(s) + h, b) - fake_quant(x, std::log2(s) - h, b)) / (2 * h);
    const double g = quant::ste_grad_log2t(x, t, b);
    worst = std::max(worst, std::abs(g - fd) / std::abs(fd));
  }
  o.pass = worst <= 1e-6;
  o.detail = fmt::format("{} above / {} below range, worst relative deviation {:.2e}", above, below, worst);
  return o;
}

// ------------------------------------------------------------------ 7

Outcome simulator_trends() {
  Outcome o;
  const sim::SystemConfig cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = sim::throughput_grid();
  std::vector<double> sp;
  for (const auto& s : grid) sp.push_back(sim::speedup(s, 4, cfg));
  const double secs = seconds_since(t0);

  auto at = [&](std::int64_t b, std::int64_t hw, std::int64_t cin, std::int64_t cout) {
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid[i].batch == b && grid[i].h == hw && grid[i].c_in == cin && grid[i].c_out == cout) return sp[i];
    return std::numeric_limits<double>::quiet_NaN();
  };
  const double top = *std::max_element(sp.begin(), sp.end());
  std::vector<std::string> broken;
  for (const auto& s : grid) {
    if (s.batch != 1) continue;
    if (at(8, s.h, s.c_in, s.c_out) < at(1, s.h, s.c_in, s.c_out)) {
      broken.push_back(fmt::format("batch {}^2 {}->{} ({:.2f}>{:.2f})", s.h, s.c_in, s.c_out,
                                   at(1, s.h, s.c_in, s.c_out), at(8, s.h, s.c_in, s.c_out)));
    }
  }
  for (const auto& s : grid)
    for (const auto& u : grid)
      if (u.batch == s.batch && u.h == s.h && u.c_out == s.c_out && u.c_in > s.c_in) {
        const double a = at(s.batch, s.h, s.c_in, s.c_out), b = at(u.batch, u.h, u.c_in, u.c_out);
        if (b < a) {
          broken.push_back(fmt::format("C_in B{} {}^2 {}->{}->{} ({:.2f}>{:.2f})", s.batch, s.h, s.c_in, u.c_in,
                                       s.c_out, a, b));
        }
      }
  const double s1 = at(8, 32, 128, 128), s2 = at(8, 32, 256, 256);
  const bool spots = std::abs(s1 - 2.62) <= 0.3 * 2.62 && std::abs(s2 - 3.18) <= 0.3 * 3.18;
  o.pass = top <= 4.0 && broken.empty() && spots && secs < 10;
  o.detail = fmt::format("max F4 speedup {:.2f}; spots {:.2f} (2.62), {:.2f} (3.18); {:.2f} s", top, s1, s2, secs);
  if (!broken.empty()) {
    o.detail += fmt::format("; {} monotonicity break(s):", broken.size());
    for (const auto& b : broken) o.detail += " " + b;
  }
  return o;
}

// ------------------------------------------------------------------ 8

Outcome traffic() {
  Outcome o;
  const sim::SystemConfig cfg;
  int layers = 0;
  for (const auto& s : sim::throughput_grid()) {
    for (int m : {2, 4}) {
      const auto r = sim::wino_layer_sim(s, m, cfg);
      const double gm = r.traffic.at("GM_rd_weights"), l1 = r.traffic.at("L1_wr_weights");
      const double expansion = static_cast<double>((m + 2) * (m + 2)) / 9.0;
      if (gm != 9.0 * static_cast<double>(s.c_in * s.c_out) || l1 / gm != expansion) o.pass = false;
    }
    ++layers;
  }
  o.detail = fmt::format("{} layers: GM weight reads equal 9*C_in*C_out; L1 weight expansion 4 (F4), 16/9 (F2)",
                         layers);
  return o;
}

// ------------------------------------------------------------------ 9

Outcome energy() {
  Outcome o;
  const sim::SystemConfig cfg;
  sim::LayerShape s;
  s.batch = 8;
  s.h = s.w = 64;
  s.c_in = s.c_out = 256;
  const auto w = sim::wino_layer_sim(s, 4, cfg), b = sim::im2col_layer_sim(s, cfg);
  const double want = 0.25 * 1923.0 / 1521.0;
  // Cube power times busy cycles; then the same through the full estimator
  // with every other cost zeroed.
  const double direct = w.busy.at("Cube") * cfg.energy.cube_wino_mw / (b.busy.at("Cube") * cfg.energy.cube_im2col_mw);
  sim::SystemConfig only_cube = cfg;
  only_cube.energy = sim::EnergyTable{};
  auto& e = only_cube.energy;
  e.l0a_rd = e.l0a_wr = e.l0b_rd = e.l0b_wr = e.l0c_a_rd = e.l0c_a_wr = 0;
  e.l0c_b_rd_im2col = e.l0c_b_rd_wino = e.l1_rd = e.l1_wr = e.gm_rd = e.gm_wr = 0;
  e.in_xform_mw = e.wt_xform_mw = e.out_xform_mw = e.im2col_engine_mw = 0;
  const double via_model = sim::energy_estimate(w, only_cube) / sim::energy_estimate(b, only_cube);
  const double zero = sim::energy_estimate(sim::SimReport{}, cfg);
  o.pass = std::abs(direct - want) <= 0.01 * want && std::abs(via_model - want) <= 0.01 * want && zero == 0.0 &&
           b.bottleneck == "Cube";
  o.detail = fmt::format("cube energy ratio {:.4f} / {:.4f} (want {:.4f}); zero-work energy {}; baseline bound by {}",
                         direct, via_model, want, zero, b.bottleneck);
  return o;
}

// ------------------------------------------------------------------ 10

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "winowise_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto twice = [&](const std::string& name, std::vector<std::string> args, const std::string& flag) {
    std::string outs[2];
    for (int k = 0; k < 2; ++k) {
      const auto p = dir / fmt::format("{}_{}", name, k);
      auto a = args;
      a.push_back(flag);
      a.push_back(p.string());
      std::ostringstream out, err;
      if (cli::run(a, out, err) != cli::kExitOk) return false;
      outs[k] = slurp(p) + out.str();
    }
    return !outs[0].empty() && outs[0] == outs[1];
  };
  const bool sim_ok = twice("sim", {"simulate", "--grid", "throughput", "--seed", "11"}, "--json");
  const bool qe_ok = twice("qe", {"quant-error", "--shape", "8,8", "--seed", "3"}, "--out");
  const bool conv_ok =
      twice("conv", {"conv", "--shape", "1,8,16,16", "--scales", "tapwise-pow2", "--seed", "7"}, "--out");
  fs::remove_all(dir);
  o.pass = sim_ok && qe_ok && conv_ok;
  o.detail = fmt::format("simulate {}, quant-error {}, quantized conv {}", sim_ok ? "identical" : "differs",
                         qe_ok ? "identical" : "differs", conv_ok ? "identical" : "differs");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"exactness of integer and float Winograd convolution", exactness},
      {"bit-growth budgets", bit_growth},
      {"MAC reduction constants", mac_reduction},
      {"shift rescaling matches division", pow2_path},
      {"quantization-error ordering", error_ordering},
      {"STE gradient on saturated branches", ste},
      {"simulator trends", simulator_trends},
      {"weight traffic invariants", traffic},
      {"energy model", energy},
      {"determinism", determinism},
  };
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > static_cast<int>(criteria.size())) {
      fmt::print(stderr, "usage: {} [criterion 1..{}]\n", argv[0], criteria.size());
      return 2;
    }
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    fmt::print("[{}] criterion {}: {}: {}\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, r.detail);
    failed += !r.pass;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
