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

#include "winowise_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "json.hpp"
#include "winowise/conv.hpp"
#include "winowise/error_report.hpp"
#include "winowise/layout.hpp"
#include "winowise/network.hpp"
#include "winowise/quantized_conv.hpp"
#include "winowise/random.hpp"
#include "winowise/sim_io.hpp"
#include "winowise/tensor_io.hpp"

namespace winowise::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Options shared by every subcommand.
struct Common {
  int m = 4;
  int bits = 8;
  int wino_bits = 0;  // 0: 10 for F4, 8 for F2
  std::string scales;
  bool verify = false;
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
  std::string padding = "same";

  int b() const { return wino_bits > 0 ? wino_bits : (m == 4 ? 10 : 8); }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--m", c.m, "Output tile size")->check(CLI::IsMember({2, 4}));
  app->add_option("--bits", c.bits, "Spatial bit width n")->check(CLI::Range(2, 16));
  app->add_option("--wino-bits", c.wino_bits, "Winograd-domain bit width b")->check(CLI::Range(2, 32));
  app->add_option("--scales", c.scales, "uniform | tapwise | tapwise-pow2")
      ->check(CLI::IsMember({"uniform", "tapwise", "tapwise-pow2", "tapwise_pow2"}));
  app->add_flag("--verify", c.verify, "Compare against the direct-convolution oracle");
  app->add_option("--seed", c.seed, "Seed for generated fixtures and simulator jitter");
  app->add_option("--config", c.config, "Simulator config JSON")->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "Output path");
  app->add_option("--padding", c.padding, "same | valid")->check(CLI::IsMember({"same", "valid"}));
}

Tensor random_tensor(const Shape& shape, bool integer, int bits, Rng& rng) {
  const auto n = static_cast<std::size_t>(shape_numel(shape));
  if (!integer) {
    std::vector<double> v(n);
    for (auto& e : v) e = rng.uniform(-1.0, 1.0);
    return Tensor(shape, Layout::kNCHW, std::move(v));
  }
  const auto lo = quant::qmin(bits), hi = quant::qmax(bits);
  if (bits <= 8) {
    std::vector<std::int8_t> v(n);
    for (auto& e : v) e = static_cast<std::int8_t>(rng.uniform_int(lo, hi));
    return Tensor(shape, Layout::kNCHW, std::move(v));
  }
  std::vector<std::int16_t> v(n);
  for (auto& e : v) e = static_cast<std::int16_t>(rng.uniform_int(lo, hi));
  return Tensor(shape, Layout::kNCHW, std::move(v));
}

Tensor as_nchw(const Tensor& y, std::int64_t channels) {
  return y.layout() == Layout::kFractal ? fractal_to_nchw(y, channels) : y;
}

struct Deviation {
  double max_rel = 0;
  double mean_rel = 0;
};

// max|d| / max|ref| and mean|d| / mean|ref|; absolute when ref is zero.
Deviation deviation(const Tensor& y, const Tensor& ref) {
  const auto a = y.to_f64_vector();
  const auto r = ref.to_f64_vector();
  if (a.size() != r.size()) throw ShapeError("output and oracle differ in size");
  double max_d = 0, max_r = 0, sum_d = 0, sum_r = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - r[i]);
    max_d = std::max(max_d, d);
    max_r = std::max(max_r, std::abs(r[i]));
    sum_d += d;
    sum_r += std::abs(r[i]);
  }
  Deviation dev;
  dev.max_rel = max_r > 0 ? max_d / max_r : max_d;
  dev.mean_rel = sum_r > 0 ? sum_d / sum_r : sum_d / std::max<std::size_t>(1, a.size());
  return dev;
}

std::string json_line(const json& j) { return j.dump() + "\n"; }

// ---------------------------------------------------------------- conv

struct ConvOpts {
  Common c;
  std::string input, weights;
  std::vector<std::int64_t> shape{1, 8, 16, 16};
  std::int64_t cout = 8;
  std::string dtype = "auto";
  std::string mode = "auto";
  std::string backend = "auto";
  std::string report;
  std::optional<double> tolerance;
};

int cmd_conv(const ConvOpts& o, std::ostream& out) {
  const auto& c = o.c;
  const auto ts = wino::make_transform_set(c.m);
  const auto padding = wino::parse_padding(c.padding);
  const bool quantized = !c.scales.empty();

  Tensor x, w;
  if (o.input.empty() != o.weights.empty()) throw ConfigError("--input and --weights go together");
  if (!o.input.empty()) {
    x = read_tensor(o.input);
    w = read_tensor(o.weights);
  } else {
    if (o.shape.size() != 4) throw ConfigError("--shape takes B,C,H,W");
    const bool integer = o.dtype == "int" || (o.dtype == "auto" && (quantized || o.mode == "exact"));
    Rng rng(c.seed);
    x = random_tensor(Shape(o.shape.begin(), o.shape.end()), integer, c.bits, rng);
    w = random_tensor({o.cout, o.shape[1], 3, 3}, integer, c.bits, rng);
  }

  Tensor y;
  std::string mode_name;
  if (quantized) {
    const auto strategy = quant::parse_scale_strategy(c.scales);
    const auto sc = quant::calibrate_scales(x, w, ts, c.b(), strategy, padding);
    auto backend = strategy == quant::ScaleStrategy::kTapwisePow2 ? quant::RescaleBackend::kShift
                                                                  : quant::RescaleBackend::kDivision;
    if (o.backend == "shift") backend = quant::RescaleBackend::kShift;
    if (o.backend == "division") backend = quant::RescaleBackend::kDivision;
    y = quant::quantized_winograd_conv2d(x, w, ts, sc.sb, sc.sg, c.b(), padding, backend);
    mode_name = "quantized";
  } else {
    auto mode = wino::default_mode(x, w);
    if (o.mode == "float") mode = wino::ArithMode::kFloat;
    if (o.mode == "exact") mode = wino::ArithMode::kExact;
    y = wino::winograd_conv2d(x, w, ts, padding, mode);
    mode_name = mode == wino::ArithMode::kExact ? "exact" : "float";
  }
  if (!c.out.empty()) write_tensor(y, c.out);

  json summary{{"command", "conv"},
               {"m", c.m},
               {"mode", mode_name},
               {"output_shape", y.shape()},
               {"output_dtype", std::string(to_string(y.dtype()))}};
  bool pass = true;
  if (c.verify) {
    const Tensor ref = wino::direct_conv2d(x, w, padding);
    const Tensor yn = as_nchw(y, w.dim(0));
    const auto dev = deviation(yn, ref);
    summary["max_rel_error"] = dev.max_rel;
    summary["mean_rel_error"] = dev.mean_rel;
    if (mode_name == "exact") {
      pass = yn == ref;
      summary["bit_exact"] = pass;
    } else {
      const double tol = o.tolerance.value_or(mode_name == "float" ? 1e-9 : std::numeric_limits<double>::infinity());
      pass = dev.max_rel <= tol;
      if (std::isfinite(tol)) summary["tolerance"] = tol;
    }
    summary["pass"] = pass;
  }
  out << json_line(summary);
  if (!o.report.empty()) write_text_atomic(o.report, summary.dump(2) + "\n");
  return pass ? kExitOk : kExitVerifyFailed;
}

// ----------------------------------------------------------- calibrate

struct CalibOpts {
  Common c;
  std::vector<std::string> inputs;
  std::string weights;
  std::vector<std::int64_t> shape{1, 8, 16, 16};
  std::int64_t cout = 8;
  int batches = 4;
  double decay = 0.9;
};

json shift_list(const quant::TapScaleMatrix& s) {
  auto a = json::array();
  for (int i = 0; i < s.t(); ++i)
    for (int j = 0; j < s.t(); ++j) a.push_back(s.shift(i, j));
  return a;
}

int cmd_calibrate(const CalibOpts& o, std::ostream& out) {
  const auto& c = o.c;
  if (c.out.empty()) throw ConfigError("calibrate needs --out DIR");
  if (!(o.decay > 0 && o.decay <= 1)) throw ConfigError("--decay must lie in (0, 1]");
  const auto ts = wino::make_transform_set(c.m);
  const auto padding = wino::parse_padding(c.padding);
  const auto strategy = quant::parse_scale_strategy(c.scales.empty() ? "tapwise" : c.scales);

  Rng rng(c.seed);
  quant::CalibState xs(ts.t, o.decay), ws(ts.t, o.decay);
  std::int64_t batches = 0;
  std::int64_t cin = o.shape.size() == 4 ? o.shape[1] : 0;
  auto observe = [&](const Tensor& x) {
    cin = x.layout() == Layout::kFractal ? x.dim(1) * kFractalC0 : x.dim(1);
    xs = quant::calibrate_update(xs, std::span<const double>(quant::input_tap_tiles(x, ts, padding)));
    ++batches;
  };
  if (!o.inputs.empty()) {
    for (const auto& p : o.inputs) observe(read_tensor(p));
  } else {
    if (o.shape.size() != 4) throw ConfigError("--shape takes B,C,H,W");
    for (int i = 0; i < o.batches; ++i) observe(random_tensor(Shape(o.shape.begin(), o.shape.end()), true, c.bits, rng));
  }
  Tensor w;
  if (!o.weights.empty()) {
    w = read_tensor(o.weights);
  } else {
    w = random_tensor({o.cout, cin, 3, 3}, true, c.bits, rng);
  }
  ws = quant::calibrate_update(ws, std::span<const double>(quant::weight_tap_tiles(w, ts)));

  const auto sb = quant::scales_for_strategy(xs, c.b(), strategy, quant::ScaleRole::kSB);
  const auto sg = quant::scales_for_strategy(ws, c.b(), strategy, quant::ScaleRole::kSG);
  const auto sb2 = quant::pow2_round(sb);
  const auto sg2 = quant::pow2_round(sg);

  const fs::path dir(c.out);
  fs::create_directories(dir);
  write_tensor(sb.to_tensor(), dir / "S_B.wtns");
  write_tensor(sg.to_tensor(), dir / "S_G.wtns");
  write_tensor(sb2.to_tensor(), dir / "S_B_pow2.wtns");
  write_tensor(sg2.to_tensor(), dir / "S_G_pow2.wtns");

  json summary{{"command", "calibrate"},
               {"m", c.m},
               {"b", c.b()},
               {"strategy", std::string(quant::to_string(strategy))},
               {"decay", o.decay},
               {"batches", batches},
               {"input_maxima", xs.maxima},
               {"weight_maxima", ws.maxima},
               {"S_B", sb.values()},
               {"S_G", sg.values()},
               {"shifts", {{"S_B", shift_list(sb2)}, {"S_G", shift_list(sg2)}}}};
  write_text_atomic(dir / "calibration.json", summary.dump(2) + "\n");
  const auto [bmin, bmax] = std::minmax_element(sb2.values().begin(), sb2.values().end());
  const auto [gmin, gmax] = std::minmax_element(sg2.values().begin(), sg2.values().end());
  out << fmt::format("calibrated {} batch(es), t={}, b={}: S_B shifts [{}, {}], S_G shifts [{}, {}]\n", batches,
                     ts.t, c.b(), static_cast<int>(std::log2(*bmin)), static_cast<int>(std::log2(*bmax)),
                     static_cast<int>(std::log2(*gmin)), static_cast<int>(std::log2(*gmax)));
  return kExitOk;
}

// --------------------------------------------------------- quant-error

struct QErrOpts {
  Common c;
  std::string weights;
  std::vector<std::int64_t> shape{16, 16};
  std::string strategy = "all";
  std::string domain = "all";
  std::string csv;
};

int cmd_quant_error(const QErrOpts& o, std::ostream& out) {
  const auto& c = o.c;
  const auto ts = wino::make_transform_set(c.m);
  Tensor w;
  if (!o.weights.empty()) {
    w = read_tensor(o.weights);
  } else {
    if (o.shape.size() != 2) throw ConfigError("--shape takes C_out,C_in");
    Rng rng(c.seed);
    std::vector<double> v(static_cast<std::size_t>(o.shape[0] * o.shape[1] * 9));
    for (auto& e : v) e = rng.normal(0.0, 0.05);
    w = Tensor({o.shape[0], o.shape[1], 3, 3}, Layout::kNCHW, std::move(v));
  }

  std::vector<quant::Granularity> grans;
  if (o.strategy == "all") {
    grans = {quant::Granularity::kLayer, quant::Granularity::kChannel, quant::Granularity::kTap,
             quant::Granularity::kChannelAndTap};
  } else {
    grans = {quant::parse_granularity(o.strategy)};
  }
  std::vector<quant::Domain> domains;
  if (o.domain == "all") {
    domains = {quant::Domain::kSpatial, quant::Domain::kWinograd};
  } else {
    domains = {quant::parse_domain(o.domain)};
  }

  auto reports = json::array();
  std::ostringstream table;
  table << "domain,strategy,mean_rel_error,mean_log2_rel_error\n";
  for (auto d : domains)
    for (auto g : grans) {
      const auto r = quant::quant_error_report(w, g, d, c.bits, &ts);
      reports.push_back(r);
      table << quant::to_string(d) << ',' << quant::to_string(g) << ','
            << fmt::format("{:.6g},{:.4f}", r.mean_rel_error, r.mean_log2_rel_error) << '\n';
    }
  const std::string doc = reports.dump(2) + "\n";
  if (!c.out.empty()) {
    write_text_atomic(c.out, doc);
  } else {
    out << doc;
  }
  if (!o.csv.empty()) write_text_atomic(o.csv, table.str());
  if (!c.out.empty()) out << table.str();
  return kExitOk;
}

// ------------------------------------------------------------ simulate

struct SimOpts {
  Common c;
  std::string grid;
  std::string layers;
  std::vector<std::int64_t> layer;
  int kernel = 3;
  int stride = 1;
  std::string breakdown;
  std::string json_path;
  bool seed_given = false;
};

std::string label_of(const sim::LayerShape& s) {
  return fmt::format("B{}_H{}_W{}_{}x{}", s.batch, s.h, s.w, s.c_in, s.c_out);
}

int cmd_simulate(const SimOpts& o, std::ostream& out) {
  const auto& c = o.c;
  sim::SystemConfig cfg = c.config.empty() ? sim::SystemConfig{} : sim::read_config(c.config);
  if (o.seed_given) cfg.seed = c.seed;
  cfg.validate();
  const int sources = !o.grid.empty() + !o.layers.empty() + !o.layer.empty();
  if (sources != 1) throw ConfigError("simulate needs exactly one of --grid, --layers, --layer");

  if (!o.layers.empty()) {
    const auto layers = sim::read_layers(o.layers);
    const auto rep = sim::network_sim(layers, cfg);
    if (!c.out.empty()) write_text_atomic(c.out, sim::network_csv(rep));
    if (!o.json_path.empty()) {
      json j = sim::network_to_json(rep);
      j["config"] = sim::config_to_json(cfg);
      write_text_atomic(o.json_path, j.dump(2) + "\n");
    }
    if (!o.breakdown.empty()) {
      std::vector<std::pair<std::string, sim::SimReport>> rows;
      for (const auto& l : rep.layers) rows.emplace_back(l.name, sim::simulate(l.shape, l.algo, cfg));
      write_text_atomic(o.breakdown, sim::breakdown_csv(rows));
    }
    out << fmt::format("{} layer(s), {:.0f} cycles, im2col {:.0f} cycles, speedup {:.3f}\n", rep.layers.size(),
                       rep.total_cycles, rep.im2col_cycles, rep.speedup());
    return kExitOk;
  }

  std::vector<sim::LayerShape> shapes;
  if (!o.grid.empty()) {
    if (o.grid != "throughput") throw ConfigError("unknown grid '" + o.grid + "'");
    shapes = sim::throughput_grid();
  } else {
    if (o.layer.size() != 5) throw ConfigError("--layer takes B,H,W,C_in,C_out");
    sim::LayerShape s;
    s.batch = o.layer[0];
    s.h = o.layer[1];
    s.w = o.layer[2];
    s.c_in = o.layer[3];
    s.c_out = o.layer[4];
    s.kernel = o.kernel;
    s.stride = o.stride;
    s.padding = wino::parse_padding(c.padding);
    shapes.push_back(s);
  }

  std::vector<std::pair<sim::SimReport, sim::SimReport>> rows;
  std::vector<std::pair<std::string, sim::SimReport>> parts;
  auto layers_json = json::array();
  for (const auto& s : shapes) {
    auto base = sim::im2col_layer_sim(s, cfg);
    auto wino = sim::wino_layer_sim(s, c.m, cfg);
    parts.emplace_back(label_of(s), base);
    parts.emplace_back(label_of(s), wino);
    layers_json.push_back({{"im2col", sim::report_to_json(base)},
                           {"wino", sim::report_to_json(wino)},
                           {"speedup", base.total_cycles / wino.total_cycles}});
    rows.emplace_back(std::move(base), std::move(wino));
  }
  if (!c.out.empty()) write_text_atomic(c.out, sim::speedup_csv(rows));
  if (!o.breakdown.empty()) write_text_atomic(o.breakdown, sim::breakdown_csv(parts));
  if (!o.json_path.empty()) {
    json j{{"config", sim::config_to_json(cfg)}, {"m", c.m}, {"layers", layers_json}};
    write_text_atomic(o.json_path, j.dump(2) + "\n");
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& [b, w] : rows) {
    lo = std::min(lo, b.total_cycles / w.total_cycles);
    hi = std::max(hi, b.total_cycles / w.total_cycles);
  }
  out << fmt::format("{} layer(s), F{} speedup over im2col in [{:.2f}, {:.2f}]\n", rows.size(), c.m, lo, hi);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Integer Winograd convolution with tap-wise quantization, and an accelerator model", "winowise"};
  app.require_subcommand(1);

  ConvOpts conv;
  auto* sc_conv = app.add_subcommand("conv", "Run (and optionally verify) a Winograd convolution");
  add_common(sc_conv, conv.c);
  sc_conv->add_option("--input", conv.input, "Activation tensor")->check(CLI::ExistingFile);
  sc_conv->add_option("--weights", conv.weights, "Weight tensor (C_out, C_in, 3, 3)")->check(CLI::ExistingFile);
  sc_conv->add_option("--shape", conv.shape, "Generated activation shape B,C,H,W")->delimiter(',');
  sc_conv->add_option("--cout", conv.cout, "Generated output channels")->check(CLI::PositiveNumber);
  sc_conv->add_option("--dtype", conv.dtype, "Generated dtype")->check(CLI::IsMember({"auto", "f64", "int"}));
  sc_conv->add_option("--mode", conv.mode, "Arithmetic")->check(CLI::IsMember({"auto", "float", "exact"}));
  sc_conv->add_option("--backend", conv.backend, "Quantized rescale")
      ->check(CLI::IsMember({"auto", "shift", "division"}));
  sc_conv->add_option("--tolerance", conv.tolerance, "Max relative error accepted by --verify");
  sc_conv->add_option("--report", conv.report, "JSON summary path");

  CalibOpts cal;
  auto* sc_cal = app.add_subcommand("calibrate", "Collect per-tap running maxima and derive scales");
  add_common(sc_cal, cal.c);
  sc_cal->add_option("--input", cal.inputs, "Activation batches, one tensor per batch")->check(CLI::ExistingFile);
  sc_cal->add_option("--weights", cal.weights, "Weight tensor")->check(CLI::ExistingFile);
  sc_cal->add_option("--shape", cal.shape, "Generated batch shape B,C,H,W")->delimiter(',');
  sc_cal->add_option("--cout", cal.cout, "Generated output channels")->check(CLI::PositiveNumber);
  sc_cal->add_option("--batches", cal.batches, "Generated batch count")->check(CLI::PositiveNumber);
  sc_cal->add_option("--decay", cal.decay, "Running-average decay");

  QErrOpts qe;
  auto* sc_qe = app.add_subcommand("quant-error", "Quantization error per scaling granularity and domain");
  add_common(sc_qe, qe.c);
  sc_qe->add_option("--weights", qe.weights, "Weight tensor (C_out, C_in, 3, 3)")->check(CLI::ExistingFile);
  sc_qe->add_option("--shape", qe.shape, "Generated weight channels C_out,C_in")->delimiter(',');
  sc_qe->add_option("--strategy", qe.strategy, "layer | channel | tap | channel_and_tap | all");
  sc_qe->add_option("--domain", qe.domain, "spatial | winograd | all");
  sc_qe->add_option("--csv", qe.csv, "Comparison table path");

  SimOpts so;
  auto* sc_sim = app.add_subcommand("simulate", "Run the accelerator performance and energy model");
  add_common(sc_sim, so.c);
  sc_sim->add_option("--grid", so.grid, "Named layer grid (throughput)");
  sc_sim->add_option("--layers", so.layers, "Network layer list JSON")->check(CLI::ExistingFile);
  sc_sim->add_option("--layer", so.layer, "Single layer B,H,W,C_in,C_out")->delimiter(',');
  sc_sim->add_option("--kernel", so.kernel, "Kernel size of --layer")->check(CLI::PositiveNumber);
  sc_sim->add_option("--stride", so.stride, "Stride of --layer")->check(CLI::IsMember({1, 2}));
  sc_sim->add_option("--breakdown", so.breakdown, "Cycle-breakdown CSV path");
  sc_sim->add_option("--json", so.json_path, "Full JSON report path");

  std::vector<std::string> argv_store{"winowise"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "winowise: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (sc_conv->parsed()) return cmd_conv(conv, out);
    if (sc_cal->parsed()) return cmd_calibrate(cal, out);
    if (sc_qe->parsed()) return cmd_quant_error(qe, out);
    so.seed_given = sc_sim->count("--seed") > 0;
    return cmd_simulate(so, out);
  } catch (const std::exception& e) {
    err << "winowise: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace winowise::cli
