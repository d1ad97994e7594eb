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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "winowise/tensor.hpp"

namespace winowise {

// Container layout:
//   "WTNS" | u32 LE header length | UTF-8 JSON {"dtype","shape","layout"}
//   | raw little-endian row-major payload.
// Rational elements are stored as (i64 numerator, i64 exponent) pairs where
// the value is numerator * 2^-exponent.
inline constexpr char kTensorMagic[4] = {'W', 'T', 'N', 'S'};

std::vector<std::byte> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::byte> bytes);

Tensor read_tensor(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void write_tensor(const Tensor& t, const std::filesystem::path& path);

// Atomic text write shared by the JSON/CSV emitters.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& contents);

}  // namespace winowise
