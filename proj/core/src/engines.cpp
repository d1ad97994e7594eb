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

#include "winowise/engines.hpp"

#include <bit>
#include <cstdlib>
#include <map>
#include <numeric>
#include <tuple>
#include <vector>

namespace winowise::sim {

std::string_view to_string(EngineKind k) {
  switch (k) {
    case EngineKind::kRowByRowSlow: return "row_by_row_slow";
    case EngineKind::kRowByRowFast: return "row_by_row_fast";
    case EngineKind::kTapByTap: return "tap_by_tap";
  }
  return "?";
}

EngineRates xform_engine_rates(const EngineSpec& s) {
  if (s.p_c < 1 || s.p_s < 1 || s.p_t < 1) throw DomainError("parallelism factors must be >= 1");
  if (s.kind != EngineKind::kTapByTap && s.p_t != 1) {
    throw DomainError("P_t applies to tap-by-tap engines only");
  }
  EngineRates r;
  const int lanes = s.p_c * s.p_s;
  switch (s.kind) {
    case EngineKind::kRowByRowSlow:
      r.cycles_per_xform = s.h_t + s.w_t;
      r.parallel_xforms = lanes;
      r.rd_bw = lanes * s.h_t;
      r.wr_bw = lanes * s.h_t;
      break;
    case EngineKind::kRowByRowFast:
      r.cycles_per_xform = s.h_t;
      r.parallel_xforms = lanes;
      r.rd_bw = lanes * s.h_t;
      r.wr_bw = lanes * s.w_t * s.w_t;
      break;
    case EngineKind::kTapByTap:
      if (s.cycles_per_xform < 1) throw DomainError("tap-by-tap engines need a schedule length");
      r.cycles_per_xform = s.cycles_per_xform;
      r.parallel_xforms = lanes * s.p_t;
      r.rd_bw = lanes;
      r.wr_bw = lanes;
      break;
  }
  return r;
}

namespace {

using Expr = std::map<int, std::int64_t>;  // variable -> coefficient

int term_cost(std::int64_t c) { return std::popcount(static_cast<std::uint64_t>(std::llabs(c))); }

int expr_cost(const Expr& e) {
  int c = 0;
  for (const auto& [v, k] : e) c += term_cost(k);
  return c;
}

// (var_a, coef_a, var_b, coef_b) with var_a < var_b and coef_a > 0 after
// dividing out a power-of-two common factor and the sign.
using PairKey = std::tuple<int, std::int64_t, int, std::int64_t>;

PairKey normalize(int va, std::int64_t ca, int vb, std::int64_t cb, std::int64_t& factor) {
  std::int64_t g = std::gcd(ca, cb);
  if (!std::has_single_bit(static_cast<std::uint64_t>(g))) g = 1;
  if (ca < 0) g = -g;
  factor = g;
  return {va, ca / g, vb, cb / g};
}

}  // namespace

CseSchedule tap_by_tap_schedule(const Matrix<std::int64_t>& t) {
  const int h = t.rows(), w = t.cols();
  std::vector<Expr> exprs;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < h; ++j) {
      Expr e;
      for (int a = 0; a < w; ++a)
        for (int b = 0; b < w; ++b) {
          const auto c = t(i, a) * t(j, b);
          if (c != 0) e[a * w + b] = c;
        }
      exprs.push_back(std::move(e));
    }
  CseSchedule s;
  s.taps = h * h;
  for (const auto& e : exprs) s.naive_cycles += expr_cost(e);

  int next_var = w * w;
  for (;;) {
    std::map<PairKey, int> counts;
    for (const auto& e : exprs) {
      for (auto a = e.begin(); a != e.end(); ++a)
        for (auto b = std::next(a); b != e.end(); ++b) {
          std::int64_t f;
          ++counts[normalize(a->first, a->second, b->first, b->second, f)];
        }
    }
    PairKey best{};
    int best_count = 1;
    for (const auto& [k, c] : counts)
      if (c > best_count) {
        best = k;
        best_count = c;
      }
    if (best_count < 2) break;
    const auto [va, ca, vb, cb] = best;
    const int node = next_var++;
    for (auto& e : exprs) {
      const auto ia = e.find(va), ib = e.find(vb);
      if (ia == e.end() || ib == e.end()) continue;
      std::int64_t f;
      if (normalize(va, ia->second, vb, ib->second, f) != best) continue;
      e.erase(va);
      e.erase(vb);
      e[node] = f;
    }
    exprs.push_back(Expr{{va, ca}, {vb, cb}});
    ++s.shared_nodes;
  }
  for (const auto& e : exprs) s.cycles += expr_cost(e);
  return s;
}

}  // namespace winowise::sim
