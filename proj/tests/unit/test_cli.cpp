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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "oracles.hpp"
#include "winowise/tensor_io.hpp"
#include "winowise_cli/commands.hpp"

using namespace winowise;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("winowise_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, FloatConvVerifies) {
  Rng rng(90);
  write_tensor(oracle::tensor_f64({1, 8, 16, 16}, rng, -1, 1), path("x.wtns"));
  write_tensor(oracle::tensor_f64({4, 8, 3, 3}, rng, -1, 1), path("w.wtns"));
  const auto r = run({"conv", "--input", path("x.wtns"), "--weights", path("w.wtns"), "--m", "4", "--verify",
                      "--out", path("y.wtns")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["mode"], "float");
  EXPECT_LE(j["max_rel_error"].get<double>(), 1e-9);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(read_tensor(path("y.wtns")).shape(), (Shape{1, 4, 16, 16}));
}

TEST_F(Cli, IntegerConvIsBitExact) {
  const auto r = run({"conv", "--shape", "2,5,9,7", "--cout", "3", "--mode", "exact", "--m", "2", "--verify",
                      "--padding", "valid"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["bit_exact"].get<bool>());
  EXPECT_EQ(j["output_shape"], json({2, 3, 7, 5}));
}

TEST_F(Cli, QuantizedConvReportsError) {
  const auto r = run({"conv", "--shape", "1,16,8,8", "--cout", "8", "--scales", "tapwise-pow2", "--verify",
                      "--report", path("rep.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = json::parse(slurp(path("rep.json")));
  EXPECT_EQ(j["mode"], "quantized");
  EXPECT_TRUE(std::isfinite(j["mean_rel_error"].get<double>()));
  const auto strict = run({"conv", "--shape", "1,16,8,8", "--cout", "8", "--scales", "uniform", "--bits", "8",
                           "--wino-bits", "4", "--verify", "--tolerance", "1e-12"});
  EXPECT_EQ(strict.code, cli::kExitVerifyFailed);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"conv", "--input", path("missing.wtns"), "--weights", path("missing.wtns")}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"conv", "--m", "3"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"transmogrify"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
  const auto r = run({"conv", "--shape", "1,2,3"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, CalibrateWritesPow2Scales) {
  const auto r = run({"calibrate", "--shape", "1,8,12,12", "--cout", "4", "--batches", "3", "--out", path("cal")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  for (const char* f : {"S_B.wtns", "S_G.wtns", "S_B_pow2.wtns", "S_G_pow2.wtns", "calibration.json"})
    EXPECT_TRUE(fs::exists(path("cal") + "/" + f)) << f;
  for (const char* f : {"S_B_pow2.wtns", "S_G_pow2.wtns"}) {
    const auto t = read_tensor(path("cal") + "/" + f);
    EXPECT_EQ(t.shape(), (Shape{6, 6}));
    for (double v : t.to_f64_vector()) {
      int e = 0;
      EXPECT_EQ(std::frexp(v, &e), 0.5) << f << " " << v;
    }
  }
  const auto j = json::parse(slurp(path("cal") + "/calibration.json"));
  EXPECT_EQ(j["batches"], 3);
  EXPECT_EQ(j["shifts"]["S_B"].size(), 36u);
}

TEST_F(Cli, CalibrateFromFiles) {
  Rng rng(91);
  write_tensor(oracle::tensor_i8({1, 4, 8, 8}, rng), path("a.wtns"));
  write_tensor(oracle::tensor_i8({1, 4, 8, 8}, rng), path("b.wtns"));
  write_tensor(oracle::tensor_i8({2, 4, 3, 3}, rng), path("w.wtns"));
  const auto r = run({"calibrate", "--input", path("a.wtns"), "--input", path("b.wtns"), "--weights",
                      path("w.wtns"), "--m", "2", "--out", path("cal")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(read_tensor(path("cal") + "/S_G.wtns").shape(), (Shape{4, 4}));
  EXPECT_EQ(run({"calibrate", "--shape", "1,4,8,8"}).code, cli::kExitUsage);
}

TEST_F(Cli, QuantErrorCoversEveryStrategyAndDomain) {
  const auto r = run({"quant-error", "--shape", "4,4", "--csv", path("t.csv")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_EQ(j.size(), 8u);
  EXPECT_EQ(j[0]["domain"], "spatial");
  EXPECT_EQ(j[7]["strategy"], "channel_and_tap");
  const auto csv = slurp(path("t.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  const auto one = run({"quant-error", "--shape", "4,4", "--strategy", "tap", "--domain", "winograd"});
  ASSERT_EQ(one.code, cli::kExitOk) << one.err;
  EXPECT_EQ(json::parse(one.out).size(), 1u);
  EXPECT_EQ(run({"quant-error", "--strategy", "kernel"}).code, cli::kExitUsage);
}

TEST_F(Cli, SimulateSingleLayer) {
  const auto r = run({"simulate", "--layer", "1,16,16,64,64", "--out", path("s.csv"), "--json", path("s.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto csv = slurp(path("s.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  const auto j = json::parse(slurp(path("s.json")));
  EXPECT_EQ(j["layers"].size(), 1u);
  EXPECT_GT(j["layers"][0]["speedup"].get<double>(), 0.0);
}

TEST_F(Cli, SimulateNetworkAndBadConfig) {
  std::ofstream(path("net.json")) << R"({"layers": [
    {"name": "c1", "batch": 1, "h": 16, "w": 16, "c_in": 64, "c_out": 64},
    {"name": "pw", "batch": 1, "h": 16, "w": 16, "c_in": 64, "c_out": 128, "kernel": 1}]})";
  const auto r = run({"simulate", "--layers", path("net.json"), "--out", path("n.csv")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(slurp(path("n.csv")).find("pw,"), std::string::npos);

  std::ofstream(path("bad.json")) << R"({"num_cores": 2, "cores_per_die": 4})";
  EXPECT_EQ(run({"simulate", "--layer", "1,16,16,64,64", "--config", path("bad.json")}).code, cli::kExitUsage);
  EXPECT_EQ(run({"simulate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"simulate", "--grid", "bogus"}).code, cli::kExitUsage);
}

TEST_F(Cli, Deterministic) {
  const auto a = run({"simulate", "--layer", "8,32,32,128,128", "--seed", "5", "--out", path("a.csv")});
  const auto b = run({"simulate", "--layer", "8,32,32,128,128", "--seed", "5", "--out", path("b.csv")});
  ASSERT_EQ(a.code, cli::kExitOk);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(run({"quant-error", "--shape", "3,3", "--seed", "2"}).out,
            run({"quant-error", "--shape", "3,3", "--seed", "2"}).out);
}
