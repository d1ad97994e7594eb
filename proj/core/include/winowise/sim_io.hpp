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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "winowise/network.hpp"

namespace winowise::sim {

// Unknown keys and ill-typed values raise ConfigError. Missing keys keep
// their defaults.
SystemConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SystemConfig& cfg);
SystemConfig read_config(const std::filesystem::path& path);

LayerShape layer_from_json(const nlohmann::json& j);
nlohmann::json layer_to_json(const LayerShape& s);

// {"layers": [{"name": ..., "batch", "h", "w", "c_in", "c_out", "kernel",
//   "stride", "padding", "algos": [...]}, ...]}
std::vector<NetworkLayer> layers_from_json(const nlohmann::json& j);
std::vector<NetworkLayer> read_layers(const std::filesystem::path& path);

nlohmann::json report_to_json(const SimReport& r);
nlohmann::json network_to_json(const NetworkReport& r);

std::string report_csv_header();
std::string report_csv_row(const SimReport& r);

// One row per (label, report) with percentage columns per category.
std::string breakdown_csv(const std::vector<std::pair<std::string, SimReport>>& rows);

// Speedup table: one row per (im2col, Winograd) pair of the same layer.
std::string speedup_csv(const std::vector<std::pair<SimReport, SimReport>>& rows);

// Network report: one row per layer.
std::string network_csv(const NetworkReport& r);

}  // namespace winowise::sim
