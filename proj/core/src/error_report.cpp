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

#include "winowise/error_report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "winowise/linalg.hpp"
#include "winowise/quant.hpp"

namespace winowise::quant {

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::kLayer: return "layer";
    case Granularity::kChannel: return "channel";
    case Granularity::kTap: return "tap";
    case Granularity::kChannelAndTap: return "channel_and_tap";
  }
  return "?";
}

std::string_view to_string(Domain d) { return d == Domain::kSpatial ? "spatial" : "winograd"; }

Granularity parse_granularity(std::string_view name) {
  if (name == "layer") return Granularity::kLayer;
  if (name == "channel") return Granularity::kChannel;
  if (name == "tap") return Granularity::kTap;
  if (name == "channel_and_tap" || name == "channel-and-tap") return Granularity::kChannelAndTap;
  throw ConfigError("unknown strategy '" + std::string(name) +
                    "' (expected layer|channel|tap|channel_and_tap)");
}

Domain parse_domain(std::string_view name) {
  if (name == "spatial") return Domain::kSpatial;
  if (name == "winograd") return Domain::kWinograd;
  throw ConfigError("unknown domain '" + std::string(name) + "' (expected spatial|winograd)");
}

double quant_offset(double x, double mu, double s, int n) {
  const double lo = static_cast<double>(qmin(n)), hi = static_cast<double>(qmax(n));
  const double v = (x - mu) / s;
  if (v <= lo) return mu + s * lo;
  if (v >= hi) return mu + s * hi;
  return mu + s * std::clamp(static_cast<double>(round_half_away(v)), lo, hi);
}

namespace {

struct Unit {
  std::vector<std::size_t> idx;  // positions in the value array
};

// Values are laid out as (c_out, c_in, tap) with `taps` taps per kernel.
std::vector<Unit> partition(Granularity g, std::int64_t cout, std::int64_t cin, int taps) {
  const auto total = static_cast<std::size_t>(cout * cin * taps);
  std::vector<Unit> units;
  auto unit_of = [&](std::size_t i) -> std::size_t {
    const auto tap = i % static_cast<std::size_t>(taps);
    const auto co = i / static_cast<std::size_t>(cin * taps);
    switch (g) {
      case Granularity::kLayer: return 0;
      case Granularity::kChannel: return co;
      case Granularity::kTap: return tap;
      case Granularity::kChannelAndTap: return co * static_cast<std::size_t>(taps) + tap;
    }
    return 0;
  };
  std::size_t count = 1;
  if (g == Granularity::kChannel) count = static_cast<std::size_t>(cout);
  if (g == Granularity::kTap) count = static_cast<std::size_t>(taps);
  if (g == Granularity::kChannelAndTap) count = static_cast<std::size_t>(cout * taps);
  units.resize(count);
  for (std::size_t i = 0; i < total; ++i) units[unit_of(i)].idx.push_back(i);
  return units;
}

double rel_error_sum(const std::vector<double>& v, const std::vector<std::size_t>& idx, double mu,
                     double s, int n) {
  double sum = 0;
  for (auto i : idx) {
    const double x = v[i];
    if (x != 0) sum += std::abs(quant_offset(x, mu, s, n) - x) / std::abs(x);
  }
  return sum;
}

}  // namespace

ErrorReport quant_error_report(const Tensor& weights, Granularity strategy, Domain domain, int n,
                               const wino::TransformSet* ts) {
  if (weights.rank() != 4 || weights.dim(2) != 3 || weights.dim(3) != 3) {
    throw ShapeError("weights must be (C_out, C_in, 3, 3), got " + shape_to_string(weights.shape()));
  }
  if (domain == Domain::kWinograd && ts == nullptr) {
    throw ConfigError("Winograd-domain error analysis needs a transform set");
  }
  if (n < 2 || n > 16) throw DomainError("bit width must be in [2, 16]");
  const auto cout = weights.dim(0), cin = weights.dim(1);
  const auto f = weights.to_f64_vector();
  const auto pairs = static_cast<std::size_t>(cout * cin);

  // Values in the quantization domain.
  std::vector<double> v;
  int taps = 9;
  Matrix<double> g, gp;
  if (domain == Domain::kSpatial) {
    v = f;
  } else {
    g = to_double(ts->g);
    gp = pseudo_inverse(g);
    taps = ts->t * ts->t;
    v.resize(pairs * static_cast<std::size_t>(taps));
    for (std::size_t p = 0; p < pairs; ++p) {
      Matrix<double> k(3, 3);
      for (int i = 0; i < 9; ++i) k(i / 3, i % 3) = f[p * 9 + static_cast<std::size_t>(i)];
      const auto u = wino::weight_transform(k, g);
      std::copy(u.data().begin(), u.data().end(), v.begin() + static_cast<std::ptrdiff_t>(p * static_cast<std::size_t>(taps)));
    }
  }

  ErrorReport rep;
  rep.strategy = strategy;
  rep.domain = domain;
  rep.n = n;
  const double levels = std::ldexp(1.0, n - 1);
  const int steps = static_cast<int>(std::lround((kGammaMax - kGammaMin) / kGammaStep));

  // Winograd tap (i, j) reaches the spatial kernel through
  // outer(pinv(G)[:, i], pinv(G)[:, j]).
  std::vector<std::array<double, 9>> back_op;
  std::vector<double> inv_abs_f(f.size(), 0.0);
  if (domain == Domain::kWinograd) {
    const int t = ts->t;
    back_op.resize(static_cast<std::size_t>(taps));
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < t; ++j)
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) back_op[static_cast<std::size_t>(i * t + j)][static_cast<std::size_t>(a * 3 + b)] = gp(a, i) * gp(b, j);
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f[i] != 0) inv_abs_f[i] = 1.0 / std::abs(f[i]);
  }
  // Spatial relative error caused by quantizing only this unit with scale s.
  // Unit indices are ascending, so the taps of one kernel are contiguous.
  auto spatial_error = [&](const Unit& unit, double mu, double s) {
    double sum = 0;
    std::size_t k = 0;
    while (k < unit.idx.size()) {
      const std::size_t p = unit.idx[k] / static_cast<std::size_t>(taps);
      std::array<double, 9> d{};
      for (; k < unit.idx.size() && unit.idx[k] / static_cast<std::size_t>(taps) == p; ++k) {
        const auto i = unit.idx[k];
        const double delta = quant_offset(v[i], mu, s, n) - v[i];
        if (delta == 0) continue;
        const auto& op = back_op[i % static_cast<std::size_t>(taps)];
        for (int e = 0; e < 9; ++e) d[static_cast<std::size_t>(e)] += delta * op[static_cast<std::size_t>(e)];
      }
      for (int e = 0; e < 9; ++e) {
        sum += std::abs(d[static_cast<std::size_t>(e)]) * inv_abs_f[p * 9 + static_cast<std::size_t>(e)];
      }
    }
    return sum;
  };

  std::vector<double> q = v;
  for (const auto& unit : partition(strategy, cout, cin, taps)) {
    UnitStats st;
    if (unit.idx.empty()) {
      rep.units.push_back(st);
      continue;
    }
    double mean = 0;
    for (auto i : unit.idx) mean += v[i];
    mean /= static_cast<double>(unit.idx.size());
    double var = 0;
    for (auto i : unit.idx) var += (v[i] - mean) * (v[i] - mean);
    st.mu = mean;
    st.sigma = std::sqrt(var / static_cast<double>(unit.idx.size()));
    // A constant unit (including all zeros) is represented exactly by mu.
    if (!(st.sigma > 0)) {
      rep.units.push_back(st);
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= steps; ++k) {
      const double gamma = kGammaMin + kGammaStep * k;
      const double s = gamma * st.sigma / levels;
      const double e = domain == Domain::kSpatial ? rel_error_sum(v, unit.idx, st.mu, s, n)
                                                  : spatial_error(unit, st.mu, s);
      if (e < best) {
        best = e;
        st.gamma = gamma;
      }
    }
    const double s = st.gamma * st.sigma / levels;
    for (auto i : unit.idx) q[i] = quant_offset(v[i], st.mu, s, n);
    rep.units.push_back(st);
  }

  // Back to the spatial domain and measure.
  std::vector<double> fq;
  if (domain == Domain::kSpatial) {
    fq = q;
  } else {
    fq.resize(f.size());
    const int t = ts->t;
    for (std::size_t p = 0; p < pairs; ++p) {
      Matrix<double> u(t, t);
      for (int i = 0; i < t * t; ++i) u(i / t, i % t) = q[p * static_cast<std::size_t>(taps) + static_cast<std::size_t>(i)];
      const auto back = matmul(matmul(gp, u), gp.transposed());
      for (int i = 0; i < 9; ++i) fq[p * 9 + static_cast<std::size_t>(i)] = back(i / 3, i % 3);
    }
  }
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 0) continue;
    sum += std::abs(fq[i] - f[i]) / std::abs(f[i]);
    ++count;
  }
  rep.mean_rel_error = count ? sum / static_cast<double>(count) : 0.0;
  rep.mean_log2_rel_error = rep.mean_rel_error > 0 ? std::log2(rep.mean_rel_error)
                                                   : -std::numeric_limits<double>::infinity();
  return rep;
}

void to_json(nlohmann::json& j, const ErrorReport& r) {
  j = nlohmann::json{{"strategy", to_string(r.strategy)},
                     {"domain", to_string(r.domain)},
                     {"n", r.n},
                     {"mean_rel_error", r.mean_rel_error}};
  // JSON has no -inf; an exact report carries null.
  if (std::isfinite(r.mean_log2_rel_error)) {
    j["mean_log2_rel_error"] = r.mean_log2_rel_error;
  } else {
    j["mean_log2_rel_error"] = nullptr;
  }
  auto units = nlohmann::json::array();
  for (const auto& u : r.units) units.push_back({{"gamma", u.gamma}, {"sigma", u.sigma}, {"mu", u.mu}});
  j["units"] = std::move(units);
}

void from_json(const nlohmann::json& j, ErrorReport& r) {
  try {
    r.strategy = parse_granularity(j.at("strategy").get<std::string>());
    r.domain = parse_domain(j.at("domain").get<std::string>());
    r.n = j.at("n").get<int>();
    r.mean_rel_error = j.at("mean_rel_error").get<double>();
    const auto& l2 = j.at("mean_log2_rel_error");
    r.mean_log2_rel_error = l2.is_null() ? -std::numeric_limits<double>::infinity() : l2.get<double>();
    r.units.clear();
    for (const auto& u : j.at("units")) {
      r.units.push_back({u.at("gamma").get<double>(), u.at("sigma").get<double>(), u.at("mu").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed error report: ") + e.what());
  }
}

}  // namespace winowise::quant
