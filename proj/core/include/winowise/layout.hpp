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

#include <cstdint>

#include "winowise/tensor.hpp"

namespace winowise {

// Splits the channel axis of a 4-D NCHW tensor into (C1, C0 = 32). Channels
// past C are zero-filled.
Tensor nchw_to_fractal(const Tensor& t);

// Inverse of nchw_to_fractal restricted to the first `channels` channels.
Tensor fractal_to_nchw(const Tensor& t, std::int64_t channels);

}  // namespace winowise
