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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "winowise/sim_io.hpp"

using namespace winowise;
using namespace winowise::sim;
using nlohmann::json;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::size_t columns(const std::string& line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1; }

}  // namespace

TEST(SimIo, DefaultConfigRoundtrip) {
  const SystemConfig cfg;
  const auto back = config_from_json(config_to_json(cfg));
  EXPECT_EQ(back.num_cores, cfg.num_cores);
  EXPECT_EQ(back.cube_k, 32);
  EXPECT_EQ(back.gm_bandwidth, cfg.gm_bandwidth);
  EXPECT_EQ(back.gm_jitter_stddev, cfg.gm_jitter_stddev);
  EXPECT_EQ(back.l1_bytes, 1248 * 1024);
  EXPECT_EQ(back.energy.cube_wino_mw, 1923);
  EXPECT_EQ(config_to_json(back), config_to_json(cfg));
}

TEST(SimIo, PartialConfigKeepsDefaults) {
  const auto cfg = config_from_json(json{{"num_cores", 4}, {"memory", {{"l1_bytes", 1 << 20}}}});
  EXPECT_EQ(cfg.num_cores, 4);
  EXPECT_EQ(cfg.l1_bytes, 1 << 20);
  EXPECT_EQ(cfg.l0a_bytes, 64 * 1024);
  EXPECT_EQ(cfg.energy.l1_rd, 0.92);
}

TEST(SimIo, InfiniteBandwidth) {
  const auto cfg = config_from_json(json{{"gm_bandwidth", "inf"}});
  EXPECT_TRUE(std::isinf(cfg.gm_bandwidth));
  EXPECT_TRUE(std::isinf(config_from_json(config_to_json(cfg)).gm_bandwidth));
}

TEST(SimIo, BadConfigs) {
  EXPECT_THROW((void)config_from_json(json{{"num_core", 2}}), ConfigError);
  EXPECT_THROW((void)config_from_json(json{{"cube", {{"q", 1}}}}), ConfigError);
  EXPECT_THROW((void)config_from_json(json{{"num_cores", "two"}}), ConfigError);
  EXPECT_THROW((void)config_from_json(json{{"num_cores", 0}}), ConfigError);
  EXPECT_THROW((void)config_from_json(json::array()), ConfigError);
  EXPECT_THROW((void)read_config("/nonexistent/winowise.json"), ConfigError);
}

TEST(SimIo, LayerRoundtrip) {
  LayerShape s;
  s.batch = 4;
  s.h = 7;
  s.w = 9;
  s.c_in = 3;
  s.c_out = 64;
  s.kernel = 7;
  s.stride = 2;
  s.padding = wino::Padding::kValid;
  const auto b = layer_from_json(layer_to_json(s));
  EXPECT_EQ(b.batch, 4);
  EXPECT_EQ(b.w, 9);
  EXPECT_EQ(b.kernel, 7);
  EXPECT_EQ(b.stride, 2);
  EXPECT_EQ(b.padding, wino::Padding::kValid);
  EXPECT_THROW((void)layer_from_json(json{{"c_in", -1}}), ConfigError);
}

TEST(SimIo, LayerList) {
  const json j{{"layers",
                {{{"name", "a"}, {"h", 8}, {"w", 8}, {"c_in", 16}, {"c_out", 16}},
                 {{"name", "b"}, {"h", 8}, {"w", 8}, {"c_in", 16}, {"c_out", 16}, {"algos", {"im2col"}}}}}};
  const auto layers = layers_from_json(j);
  ASSERT_EQ(layers.size(), 2u);
  EXPECT_EQ(layers[0].name, "a");
  EXPECT_TRUE(layers[0].eligible.empty());
  ASSERT_EQ(layers[1].eligible.size(), 1u);
  EXPECT_EQ(layers[1].eligible[0], Algo::kIm2col);
  EXPECT_THROW((void)layers_from_json(json{{"layers", 3}}), ConfigError);
  EXPECT_THROW((void)layers_from_json(json{{"layers", {{{"name", "x"}, {"algos", {"fft"}}}}}}), ConfigError);
}

TEST(SimIo, CsvShapes) {
  const SystemConfig cfg;
  LayerShape s;
  s.batch = 1;
  s.h = s.w = 16;
  s.c_in = s.c_out = 64;
  const auto base = im2col_layer_sim(s, cfg);
  const auto wino = wino_layer_sim(s, 4, cfg);

  const auto hdr = report_csv_header();
  const auto row = report_csv_row(wino);
  EXPECT_EQ(columns(lines(hdr)[0]), columns(lines(row)[0]));
  EXPECT_EQ(row.rfind("wino_f4,1,16,16,64,64,3,1,same,", 0), 0u) << row;

  const auto sp = lines(speedup_csv({{base, wino}}));
  ASSERT_EQ(sp.size(), 2u);
  EXPECT_EQ(columns(sp[0]), columns(sp[1]));
  std::istringstream cells(sp[1]);
  std::vector<std::string> v;
  for (std::string c; std::getline(cells, c, ',');) v.push_back(c);
  EXPECT_NEAR(std::stod(v[8]), base.total_cycles / wino.total_cycles, 1e-8);

  const auto bd = lines(breakdown_csv({{"x", wino}}));
  ASSERT_EQ(bd.size(), 2u);
  EXPECT_EQ(bd[0], "label,algo,total_cycles,wt_transfer_xform,ifm_transfer,input_xform,cube,output_xform_vector,ofm_write");
  EXPECT_EQ(columns(bd[1]), 9u);

  const auto rep = network_sim({{"l0", s, {}}}, cfg);
  const auto net = lines(network_csv(rep));
  ASSERT_EQ(net.size(), 2u);
  EXPECT_EQ(net[1].rfind("l0,", 0), 0u);
  EXPECT_EQ(network_to_json(rep)["layers"].size(), 1u);
}

TEST(SimIo, ReportJson) {
  LayerShape s;
  s.h = s.w = 8;
  s.c_in = s.c_out = 32;
  const auto r = wino_layer_sim(s, 2, SystemConfig{});
  const auto j = report_to_json(r);
  EXPECT_EQ(j["algo"], "wino_f2");
  EXPECT_EQ(j["total_cycles"].get<double>(), r.total_cycles);
  EXPECT_EQ(j["bottleneck"], r.bottleneck);
}
