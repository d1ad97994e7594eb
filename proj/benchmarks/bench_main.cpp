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

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "winowise/conv.hpp"
#include "winowise/error_report.hpp"
#include "winowise/network.hpp"
#include "winowise/quantized_conv.hpp"
#include "winowise/random.hpp"

using namespace winowise;

namespace {

Tensor random_i8(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::int8_t> v(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& e : v) e = static_cast<std::int8_t>(rng.uniform_int(-128, 127));
  return Tensor(std::move(shape), Layout::kNCHW, std::move(v));
}

Tensor random_f64(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& e : v) e = rng.uniform(-1.0, 1.0);
  return Tensor(std::move(shape), Layout::kNCHW, std::move(v));
}

// Args: m, channels (C_in = C_out), spatial extent.
void BM_WinogradFloat(benchmark::State& st) {
  const int m = static_cast<int>(st.range(0));
  const std::int64_t c = st.range(1), hw = st.range(2);
  const auto ts = wino::make_transform_set(m);
  const auto x = random_f64({1, c, hw, hw}, 1), w = random_f64({c, c, 3, 3}, 2);
  for (auto _ : st) benchmark::DoNotOptimize(wino::winograd_conv2d(x, w, ts, wino::Padding::kSame, wino::ArithMode::kFloat));
  st.SetItemsProcessed(st.iterations() * hw * hw * c * c * 9);
}
BENCHMARK(BM_WinogradFloat)->Args({2, 32, 32})->Args({4, 32, 32})->Args({4, 64, 64})->Unit(benchmark::kMillisecond);

void BM_WinogradExact(benchmark::State& st) {
  const int m = static_cast<int>(st.range(0));
  const std::int64_t c = st.range(1), hw = st.range(2);
  const auto ts = wino::make_transform_set(m);
  const auto x = random_i8({1, c, hw, hw}, 3), w = random_i8({c, c, 3, 3}, 4);
  for (auto _ : st) benchmark::DoNotOptimize(wino::winograd_conv2d(x, w, ts, wino::Padding::kSame, wino::ArithMode::kExact));
  st.SetItemsProcessed(st.iterations() * hw * hw * c * c * 9);
}
BENCHMARK(BM_WinogradExact)->Args({2, 32, 32})->Args({4, 32, 32})->Unit(benchmark::kMillisecond);

void BM_DirectConv(benchmark::State& st) {
  const std::int64_t c = st.range(0), hw = st.range(1);
  const auto x = random_i8({1, c, hw, hw}, 5), w = random_i8({c, c, 3, 3}, 6);
  for (auto _ : st) benchmark::DoNotOptimize(wino::direct_conv2d(x, w, wino::Padding::kSame));
  st.SetItemsProcessed(st.iterations() * hw * hw * c * c * 9);
}
BENCHMARK(BM_DirectConv)->Args({32, 32})->Unit(benchmark::kMillisecond);

void BM_QuantizedConv(benchmark::State& st) {
  const auto backend = st.range(0) ? quant::RescaleBackend::kShift : quant::RescaleBackend::kDivision;
  const auto ts = wino::make_transform_set(4);
  const auto x = random_i8({1, 32, 32, 32}, 7), w = random_i8({32, 32, 3, 3}, 8);
  const auto sc = quant::calibrate_scales(x, w, ts, 10, quant::ScaleStrategy::kTapwisePow2, wino::Padding::kSame);
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        quant::quantized_winograd_conv2d(x, w, ts, sc.sb, sc.sg, 10, wino::Padding::kSame, backend));
  }
}
BENCHMARK(BM_QuantizedConv)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ErrorReport(benchmark::State& st) {
  const auto g = static_cast<quant::Granularity>(st.range(0));
  const auto ts = wino::make_transform_set(4);
  Rng rng(9);
  std::vector<double> v(16 * 16 * 9);
  for (auto& e : v) e = rng.normal(0.0, 0.05);
  const Tensor w({16, 16, 3, 3}, Layout::kNCHW, std::move(v));
  for (auto _ : st) benchmark::DoNotOptimize(quant::quant_error_report(w, g, quant::Domain::kWinograd, 8, &ts));
}
BENCHMARK(BM_ErrorReport)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_SimulatorGrid(benchmark::State& st) {
  const sim::SystemConfig cfg;
  const auto grid = sim::throughput_grid();
  for (auto _ : st)
    for (const auto& s : grid) benchmark::DoNotOptimize(sim::speedup(s, 4, cfg));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_SimulatorGrid)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
