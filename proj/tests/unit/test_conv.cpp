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

#include "oracles.hpp"
#include "winowise/conv.hpp"
#include "winowise/layout.hpp"

using namespace winowise;
using wino::Padding;

namespace {

Tensor to_i32_tensor(const oracle::Nd4<std::int64_t>& a) {
  std::vector<std::int32_t> v(a.v.begin(), a.v.end());
  return Tensor({a.a, a.b, a.c, a.d}, Layout::kNCHW, std::move(v));
}

}  // namespace

TEST(DirectConv, AllOnesValidIsNine) {
  const Tensor x({1, 1, 3, 3}, Layout::kNCHW, std::vector<std::int8_t>(9, 1));
  const auto y = wino::direct_conv2d(x, x, Padding::kValid);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(y.as_double(0), 9.0);
}

TEST(DirectConv, ImpulseResponseEmbedsKernel) {
  Rng rng(7);
  std::vector<std::int8_t> xv(49, 0);
  xv[3 * 7 + 3] = 1;
  const Tensor x({1, 1, 7, 7}, Layout::kNCHW, xv);
  const auto w = oracle::tensor_i8({1, 1, 3, 3}, rng);
  const auto y = wino::direct_conv2d(x, w, Padding::kSame);
  // Correlation flips the kernel around the impulse.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      EXPECT_EQ(y.as_double((4 - i) * 7 + (4 - j)), static_cast<double>(w.at<std::int8_t>({0, 0, i, j})));
}

TEST(DirectConv, MatchesScatterOracleForOddKernelsAndStrides) {
  Rng rng(8);
  for (int k : {1, 3, 5})
    for (int stride : {1, 2})
      for (auto pad : {Padding::kSame, Padding::kValid}) {
        const auto x = oracle::tensor_i8({2, 3, 9, 8}, rng);
        const auto w = oracle::tensor_i8({4, 3, k, k}, rng);
        const auto y = wino::direct_conv2d(x, w, pad, stride);
        const auto ref = oracle::scatter_conv(oracle::from_tensor<std::int64_t>(x),
                                              oracle::from_tensor<std::int64_t>(w),
                                              pad == Padding::kSame ? k / 2 : 0, stride);
        ASSERT_EQ(y.dtype(), DType::kI32);
        EXPECT_EQ(y, to_i32_tensor(ref)) << "k=" << k << " stride=" << stride;
        EXPECT_EQ(y.dim(2), wino::conv_output_extent(9, k, pad, stride));
      }
}

TEST(DirectConv, RejectsMismatchedChannels) {
  Rng rng(9);
  const auto x = oracle::tensor_i8({1, 3, 5, 5}, rng);
  const auto w = oracle::tensor_i8({2, 4, 3, 3}, rng);
  EXPECT_THROW((void)wino::direct_conv2d(x, w, Padding::kSame), ShapeError);
  EXPECT_THROW((void)wino::direct_conv2d(x, oracle::tensor_i8({2, 3, 3, 3}, rng), Padding::kSame, 3),
               UnsupportedError);
}

TEST(WinogradConv, CenterDeltaIsIdentity) {
  Rng rng(10);
  const std::int64_t c = 3;
  std::vector<std::int8_t> wv(static_cast<std::size_t>(c * c * 9), 0);
  for (std::int64_t i = 0; i < c; ++i) wv[static_cast<std::size_t>((i * c + i) * 9 + 4)] = 1;
  const Tensor w({c, c, 3, 3}, Layout::kNCHW, wv);
  const auto x = oracle::tensor_i8({2, c, 9, 7}, rng);
  for (int m : {2, 4}) {
    const auto ts = wino::make_transform_set(m);
    const auto y = wino::winograd_conv2d(x, w, ts, Padding::kSame);
    ASSERT_EQ(y.shape(), x.shape());
    for (std::int64_t i = 0; i < x.numel(); ++i) ASSERT_EQ(y.as_double(i), x.as_double(i));
  }
}

TEST(WinogradConv, ZeroInputGivesZero) {
  Rng rng(11);
  const auto w = oracle::tensor_f64({3, 2, 3, 3}, rng);
  const auto x = Tensor::zeros<double>({1, 2, 8, 8}, Layout::kNCHW);
  for (int m : {2, 4}) {
    const auto y = wino::winograd_conv2d(x, w, wino::make_transform_set(m), Padding::kSame);
    for (double v : y.to_f64_vector()) EXPECT_EQ(v, 0.0);
  }
}

TEST(WinogradConv, FloatModeWithinTolerance) {
  Rng rng(12);
  for (int m : {2, 4})
    for (auto pad : {Padding::kSame, Padding::kValid}) {
      const auto x = oracle::tensor_f64({1, 2, 8, 8}, rng);
      const auto w = oracle::tensor_f64({3, 2, 3, 3}, rng);
      const auto y = wino::winograd_conv2d(x, w, wino::make_transform_set(m), pad);
      const auto ref = oracle::scatter_conv(oracle::from_tensor<long double>(x), oracle::from_tensor<long double>(w),
                                            pad == Padding::kSame ? 1 : 0);
      ASSERT_EQ(y.dtype(), DType::kF64);
      const std::vector<double> r(ref.v.begin(), ref.v.end());
      EXPECT_LE(oracle::max_rel(y.to_f64_vector(), r), 1e-9) << "m=" << m;
    }
}

TEST(WinogradConv, LargeFloatLayerWithinTolerance) {
  Rng rng(13);
  const auto x = oracle::tensor_f64({1, 64, 64, 64}, rng);
  const auto w = oracle::tensor_f64({64, 64, 3, 3}, rng);
  const auto ts = wino::make_transform_set(4);
  const auto y = wino::winograd_conv2d(x, w, ts, Padding::kSame);
  const auto ref = wino::direct_conv2d(x, w, Padding::kSame);
  EXPECT_LE(oracle::max_rel(y.to_f64_vector(), ref.to_f64_vector()), 1e-9);
}

TEST(WinogradConv, ExactModeMatchesScatterOracle) {
  Rng rng(14);
  for (int m : {2, 4})
    for (auto pad : {Padding::kSame, Padding::kValid})
      for (int trial = 0; trial < 4; ++trial) {
        const Shape xs{rng.uniform_int(1, 2), rng.uniform_int(1, 40), rng.uniform_int(3, 13), rng.uniform_int(3, 13)};
        const auto x = oracle::tensor_i8(xs, rng);
        const auto w = oracle::tensor_i8({rng.uniform_int(1, 9), xs[1], 3, 3}, rng);
        const auto y = wino::winograd_conv2d(x, w, wino::make_transform_set(m), pad);
        const auto ref = oracle::scatter_conv(oracle::from_tensor<std::int64_t>(x),
                                              oracle::from_tensor<std::int64_t>(w), pad == Padding::kSame ? 1 : 0);
        ASSERT_EQ(y.dtype(), DType::kI32);
        ASSERT_EQ(y, to_i32_tensor(ref)) << "m=" << m << " shape " << shape_to_string(xs);
      }
}

TEST(WinogradConv, ExactModeOnDyadicOperands) {
  Rng rng(15);
  std::vector<Dyadic> xv(2 * 6 * 6), wv(2 * 2 * 9);
  for (auto& e : xv) e = Dyadic(rng.uniform_int(-50, 50), rng.uniform_int(0, 4));
  for (auto& e : wv) e = Dyadic(rng.uniform_int(-50, 50), rng.uniform_int(0, 4));
  const Tensor x({1, 2, 6, 6}, Layout::kNCHW, xv), w({2, 2, 3, 3}, Layout::kNCHW, wv);
  for (int m : {2, 4}) {
    const auto y = wino::winograd_conv2d(x, w, wino::make_transform_set(m), Padding::kSame);
    ASSERT_EQ(y.dtype(), DType::kRational);
    EXPECT_EQ(y, wino::direct_conv2d(x, w, Padding::kSame));
  }
}

TEST(WinogradConv, ExplicitFloatModeOnIntegers) {
  Rng rng(16);
  const auto x = oracle::tensor_i8({1, 4, 8, 8}, rng);
  const auto w = oracle::tensor_i8({4, 4, 3, 3}, rng);
  const auto ts = wino::make_transform_set(4);
  EXPECT_EQ(wino::default_mode(x, w), wino::ArithMode::kExact);
  const auto y = wino::winograd_conv2d(x, w, ts, Padding::kSame, wino::ArithMode::kFloat);
  EXPECT_EQ(y.dtype(), DType::kF64);
  const auto ref = wino::direct_conv2d(x, w, Padding::kSame);
  EXPECT_LE(oracle::max_rel(y.to_f64_vector(), ref.to_f64_vector()), 1e-12);
}

TEST(WinogradConv, FractalLayoutRoundtrips) {
  Rng rng(17);
  const auto x = oracle::tensor_i8({1, 40, 8, 8}, rng);
  const auto w = oracle::tensor_i8({36, 40, 3, 3}, rng);
  const auto ts = wino::make_transform_set(4);
  const auto y = wino::winograd_conv2d(nchw_to_fractal(x), w, ts, Padding::kSame);
  EXPECT_EQ(y.layout(), Layout::kFractal);
  EXPECT_EQ(fractal_to_nchw(y, 36), wino::direct_conv2d(x, w, Padding::kSame));
}

TEST(WinogradConv, OddSpatialExtentsCropExcess) {
  Rng rng(18);
  const auto x = oracle::tensor_i8({1, 3, 11, 5}, rng);
  const auto w = oracle::tensor_i8({2, 3, 3, 3}, rng);
  const auto y = wino::winograd_conv2d(x, w, wino::make_transform_set(4), Padding::kValid);
  EXPECT_EQ(y.shape(), (Shape{1, 2, 9, 3}));
  EXPECT_EQ(y, wino::direct_conv2d(x, w, Padding::kValid));
}

TEST(WinogradConv, RejectsUnsupportedWorkloads) {
  Rng rng(19);
  const auto ts = wino::make_transform_set(4);
  const auto x = oracle::tensor_i8({1, 2, 8, 8}, rng);
  EXPECT_THROW((void)wino::winograd_conv2d(x, oracle::tensor_i8({2, 2, 5, 5}, rng), ts, Padding::kSame),
               UnsupportedError);
  EXPECT_THROW((void)wino::winograd_conv2d(x, oracle::tensor_i8({2, 2, 3, 3}, rng), ts, Padding::kSame, 2),
               UnsupportedError);
  EXPECT_THROW((void)wino::winograd_conv2d(x, oracle::tensor_i8({2, 3, 3, 3}, rng), ts, Padding::kSame),
               ShapeError);
}

TEST(WinogradConv, OutputExtent) {
  EXPECT_EQ(wino::conv_output_extent(32, 3, Padding::kSame, 1), 32);
  EXPECT_EQ(wino::conv_output_extent(32, 3, Padding::kValid, 1), 30);
  EXPECT_EQ(wino::conv_output_extent(32, 3, Padding::kSame, 2), 16);
  EXPECT_EQ(wino::conv_output_extent(7, 1, Padding::kValid, 2), 4);
  EXPECT_EQ(wino::parse_padding("valid"), Padding::kValid);
  EXPECT_THROW((void)wino::parse_padding("reflect"), ConfigError);
}

TEST(WinogradConv, DeterministicAcrossCalls) {
  Rng rng(20);
  const auto x = oracle::tensor_f64({1, 5, 12, 12}, rng);
  const auto w = oracle::tensor_f64({3, 5, 3, 3}, rng);
  const auto ts = wino::make_transform_set(4);
  EXPECT_EQ(wino::winograd_conv2d(x, w, ts, Padding::kSame), wino::winograd_conv2d(x, w, ts, Padding::kSame));
}
