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

#include "winowise/sim_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace winowise::sim {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + what);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

SystemConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"num_cores", "cube", "gm_bandwidth", "gm_latency", "gm_jitter_stddev", "seed",
                  "memory", "clock_mhz", "broadcast", "vector_bytes_per_cycle", "energy"},
                 "system config");
  SystemConfig c;
  read(j, "num_cores", c.num_cores);
  if (j.contains("cube")) {
    const auto& cj = j["cube"];
    reject_unknown(cj, {"m", "k", "n"}, "cube");
    read(cj, "m", c.cube_m);
    read(cj, "k", c.cube_k);
    read(cj, "n", c.cube_n);
  }
  if (j.contains("gm_bandwidth") && j["gm_bandwidth"].is_string() && j["gm_bandwidth"] == "inf") {
    c.gm_bandwidth = std::numeric_limits<double>::infinity();
  } else {
    read(j, "gm_bandwidth", c.gm_bandwidth);
  }
  read(j, "gm_latency", c.gm_latency);
  read(j, "gm_jitter_stddev", c.gm_jitter_stddev);
  read(j, "seed", c.seed);
  if (j.contains("memory")) {
    const auto& mj = j["memory"];
    reject_unknown(mj, {"l0a_bytes", "l0b_bytes", "l0c_bytes", "l1_bytes"}, "memory");
    read(mj, "l0a_bytes", c.l0a_bytes);
    read(mj, "l0b_bytes", c.l0b_bytes);
    read(mj, "l0c_bytes", c.l0c_bytes);
    read(mj, "l1_bytes", c.l1_bytes);
  }
  read(j, "clock_mhz", c.clock_mhz);
  read(j, "broadcast", c.broadcast);
  read(j, "vector_bytes_per_cycle", c.vector_bytes_per_cycle);
  if (j.contains("energy")) {
    const auto& ej = j["energy"];
    auto& e = c.energy;
    reject_unknown(ej,
                   {"l0a_rd", "l0a_wr", "l0b_rd", "l0b_wr", "l0c_a_rd", "l0c_a_wr", "l0c_b_rd_im2col",
                    "l0c_b_rd_wino", "l1_rd", "l1_wr", "gm_rd", "gm_wr", "cube_im2col_mw",
                    "cube_wino_mw", "in_xform_mw", "wt_xform_mw", "out_xform_mw", "im2col_engine_mw"},
                   "energy");
    read(ej, "l0a_rd", e.l0a_rd);
    read(ej, "l0a_wr", e.l0a_wr);
    read(ej, "l0b_rd", e.l0b_rd);
    read(ej, "l0b_wr", e.l0b_wr);
    read(ej, "l0c_a_rd", e.l0c_a_rd);
    read(ej, "l0c_a_wr", e.l0c_a_wr);
    read(ej, "l0c_b_rd_im2col", e.l0c_b_rd_im2col);
    read(ej, "l0c_b_rd_wino", e.l0c_b_rd_wino);
    read(ej, "l1_rd", e.l1_rd);
    read(ej, "l1_wr", e.l1_wr);
    read(ej, "gm_rd", e.gm_rd);
    read(ej, "gm_wr", e.gm_wr);
    read(ej, "cube_im2col_mw", e.cube_im2col_mw);
    read(ej, "cube_wino_mw", e.cube_wino_mw);
    read(ej, "in_xform_mw", e.in_xform_mw);
    read(ej, "wt_xform_mw", e.wt_xform_mw);
    read(ej, "out_xform_mw", e.out_xform_mw);
    read(ej, "im2col_engine_mw", e.im2col_engine_mw);
  }
  c.validate();
  return c;
}

json config_to_json(const SystemConfig& c) {
  const auto& e = c.energy;
  json j{{"num_cores", c.num_cores},
         {"cube", {{"m", c.cube_m}, {"k", c.cube_k}, {"n", c.cube_n}}},
         {"gm_latency", c.gm_latency},
         {"gm_jitter_stddev", c.gm_jitter_stddev},
         {"seed", c.seed},
         {"memory",
          {{"l0a_bytes", c.l0a_bytes}, {"l0b_bytes", c.l0b_bytes}, {"l0c_bytes", c.l0c_bytes}, {"l1_bytes", c.l1_bytes}}},
         {"clock_mhz", c.clock_mhz},
         {"broadcast", c.broadcast},
         {"vector_bytes_per_cycle", c.vector_bytes_per_cycle},
         {"energy",
          {{"l0a_rd", e.l0a_rd},
           {"l0a_wr", e.l0a_wr},
           {"l0b_rd", e.l0b_rd},
           {"l0b_wr", e.l0b_wr},
           {"l0c_a_rd", e.l0c_a_rd},
           {"l0c_a_wr", e.l0c_a_wr},
           {"l0c_b_rd_im2col", e.l0c_b_rd_im2col},
           {"l0c_b_rd_wino", e.l0c_b_rd_wino},
           {"l1_rd", e.l1_rd},
           {"l1_wr", e.l1_wr},
           {"gm_rd", e.gm_rd},
           {"gm_wr", e.gm_wr},
           {"cube_im2col_mw", e.cube_im2col_mw},
           {"cube_wino_mw", e.cube_wino_mw},
           {"in_xform_mw", e.in_xform_mw},
           {"wt_xform_mw", e.wt_xform_mw},
           {"out_xform_mw", e.out_xform_mw},
           {"im2col_engine_mw", e.im2col_engine_mw}}}};
  if (std::isinf(c.gm_bandwidth)) {
    j["gm_bandwidth"] = "inf";
  } else {
    j["gm_bandwidth"] = c.gm_bandwidth;
  }
  return j;
}

SystemConfig read_config(const std::filesystem::path& path) { return config_from_json(parse_file(path)); }

LayerShape layer_from_json(const json& j) {
  reject_unknown(j, {"name", "batch", "h", "w", "c_in", "c_out", "kernel", "stride", "padding", "algos"},
                 "layer");
  LayerShape s;
  read(j, "batch", s.batch);
  read(j, "h", s.h);
  read(j, "w", s.w);
  read(j, "c_in", s.c_in);
  read(j, "c_out", s.c_out);
  read(j, "kernel", s.kernel);
  read(j, "stride", s.stride);
  if (j.contains("padding")) {
    if (!j["padding"].is_string()) throw ConfigError("padding must be a string");
    s.padding = wino::parse_padding(j["padding"].get<std::string>());
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid layer: ") + e.what());
  }
  return s;
}

json layer_to_json(const LayerShape& s) {
  return json{{"batch", s.batch},   {"h", s.h},           {"w", s.w},
              {"c_in", s.c_in},     {"c_out", s.c_out},   {"kernel", s.kernel},
              {"stride", s.stride}, {"padding", wino::to_string(s.padding)}};
}

std::vector<NetworkLayer> layers_from_json(const json& j) {
  const json* arr = &j;
  if (j.is_object()) {
    reject_unknown(j, {"layers"}, "layer list");
    if (!j.contains("layers")) throw ConfigError("layer list needs a 'layers' array");
    arr = &j["layers"];
  }
  if (!arr->is_array()) throw ConfigError("'layers' must be an array");
  std::vector<NetworkLayer> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const auto& lj = (*arr)[i];
    NetworkLayer l;
    l.shape = layer_from_json(lj);
    l.name = lj.contains("name") && lj["name"].is_string() ? lj["name"].get<std::string>()
                                                             : "layer" + std::to_string(i);
    if (lj.contains("algos")) {
      if (!lj["algos"].is_array()) throw ConfigError("'algos' must be an array");
      for (const auto& a : lj["algos"]) {
        if (!a.is_string()) throw ConfigError("algorithm names must be strings");
        l.eligible.push_back(parse_algo(a.get<std::string>()));
      }
    }
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<NetworkLayer> read_layers(const std::filesystem::path& path) {
  return layers_from_json(parse_file(path));
}

json report_to_json(const SimReport& r) {
  json crit = json::object();
  const auto pct = breakdown(r);
  json share = json::object();
  for (int i = 0; i < kNumCategories; ++i) {
    const auto name = std::string(to_string(static_cast<Category>(i)));
    crit[name] = r.critical[static_cast<std::size_t>(i)];
    share[name] = pct[static_cast<std::size_t>(i)];
  }
  return json{{"algo", to_string(r.algo)},
              {"layer", layer_to_json(r.layer)},
              {"total_cycles", r.total_cycles},
              {"busy_cycles", r.busy},
              {"bytes", r.bytes},
              {"traffic", r.traffic},
              {"critical_path_cycles", crit},
              {"breakdown_percent", share},
              {"bottleneck", r.bottleneck},
              {"energy_pj", r.energy_pj},
              {"macs_per_cycle", r.macs_per_cycle},
              {"mapping", {{"cout_group", r.cout_group}, {"strip_rows", r.strip_rows}, {"strip_cols", r.strip_cols}}}};
}

json network_to_json(const NetworkReport& r) {
  json layers = json::array();
  for (const auto& l : r.layers) {
    json cand = json::object();
    for (const auto& [a, c] : l.candidates) cand[std::string(to_string(a))] = c;
    layers.push_back({{"name", l.name},
                      {"layer", layer_to_json(l.shape)},
                      {"algo", to_string(l.algo)},
                      {"cycles", l.cycles},
                      {"energy_pj", l.energy_pj},
                      {"im2col_cycles", l.im2col_cycles},
                      {"im2col_energy_pj", l.im2col_energy_pj},
                      {"candidates", cand}});
  }
  return json{{"layers", layers},
              {"total_cycles", r.total_cycles},
              {"energy_pj", r.energy_pj},
              {"im2col_cycles", r.im2col_cycles},
              {"im2col_energy_pj", r.im2col_energy_pj},
              {"speedup", r.speedup()}};
}

std::string report_csv_header() {
  return "algo,batch,h,w,c_in,c_out,kernel,stride,padding,total_cycles,cube_busy,gm_rd_bytes,"
         "gm_wr_bytes,energy_pj,macs_per_cycle,bottleneck\n";
}

std::string report_csv_row(const SimReport& r) {
  auto get = [](const std::map<std::string, double>& m, const char* k) {
    const auto it = m.find(k);
    return it == m.end() ? 0.0 : it->second;
  };
  const auto& s = r.layer;
  std::ostringstream os;
  os << to_string(r.algo) << ',' << s.batch << ',' << s.h << ',' << s.w << ',' << s.c_in << ','
     << s.c_out << ',' << s.kernel << ',' << s.stride << ',' << wino::to_string(s.padding) << ','
     << fmt(r.total_cycles) << ',' << fmt(get(r.busy, "Cube")) << ',' << fmt(get(r.bytes, "GM_rd")) << ','
     << fmt(get(r.bytes, "GM_wr")) << ',' << fmt(r.energy_pj) << ',' << fmt(r.macs_per_cycle) << ','
     << r.bottleneck << '\n';
  return os.str();
}

std::string breakdown_csv(const std::vector<std::pair<std::string, SimReport>>& rows) {
  std::ostringstream os;
  os << "label,algo,total_cycles";
  for (int i = 0; i < kNumCategories; ++i) os << ',' << to_string(static_cast<Category>(i));
  os << '\n';
  for (const auto& [label, r] : rows) {
    os << label << ',' << to_string(r.algo) << ',' << fmt(r.total_cycles);
    for (double p : breakdown(r)) os << ',' << fmt(p);
    os << '\n';
  }
  return os.str();
}

std::string speedup_csv(const std::vector<std::pair<SimReport, SimReport>>& rows) {
  std::ostringstream os;
  os << "batch,h,w,c_in,c_out,algo,im2col_cycles,wino_cycles,speedup,cout_group,strip_rows,strip_cols\n";
  for (const auto& [base, wino] : rows) {
    const auto& s = wino.layer;
    os << s.batch << ',' << s.h << ',' << s.w << ',' << s.c_in << ',' << s.c_out << ',' << to_string(wino.algo)
       << ',' << fmt(base.total_cycles) << ',' << fmt(wino.total_cycles) << ','
       << fmt(base.total_cycles / wino.total_cycles) << ',' << wino.cout_group << ',' << wino.strip_rows << ','
       << wino.strip_cols << '\n';
  }
  return os.str();
}

std::string network_csv(const NetworkReport& r) {
  std::ostringstream os;
  os << "name,batch,h,w,c_in,c_out,kernel,stride,algo,cycles,im2col_cycles,speedup,energy_pj\n";
  for (const auto& l : r.layers) {
    const auto& s = l.shape;
    os << l.name << ',' << s.batch << ',' << s.h << ',' << s.w << ',' << s.c_in << ',' << s.c_out << ','
       << s.kernel << ',' << s.stride << ',' << to_string(l.algo) << ',' << fmt(l.cycles) << ','
       << fmt(l.im2col_cycles) << ',' << fmt(l.im2col_cycles / l.cycles) << ',' << fmt(l.energy_pj) << '\n';
  }
  return os.str();
}

}  // namespace winowise::sim
