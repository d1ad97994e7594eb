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

#include "winowise/layout.hpp"

#include <type_traits>

namespace winowise {

Tensor nchw_to_fractal(const Tensor& t) {
  if (t.rank() != 4) {
    throw ShapeError("nchw_to_fractal expects a 4-D tensor, got " + shape_to_string(t.shape()));
  }
  const auto n = t.dim(0), c = t.dim(1), h = t.dim(2), w = t.dim(3);
  const auto c1 = (c + kFractalC0 - 1) / kFractalC0;
  Shape out_shape{n, c1, h, w, kFractalC0};
  return std::visit(
      [&](const auto& src) {
        using T = typename std::decay_t<decltype(src)>::value_type;
        std::vector<T> dst(static_cast<std::size_t>(shape_numel(out_shape)), T{});
        for (std::int64_t in = 0; in < n; ++in)
          for (std::int64_t ic = 0; ic < c; ++ic)
            for (std::int64_t ih = 0; ih < h; ++ih)
              for (std::int64_t iw = 0; iw < w; ++iw) {
                const auto s = ((in * c + ic) * h + ih) * w + iw;
                const auto d = (((in * c1 + ic / kFractalC0) * h + ih) * w + iw) * kFractalC0 +
                               ic % kFractalC0;
                dst[static_cast<std::size_t>(d)] = src[static_cast<std::size_t>(s)];
              }
        return Tensor(out_shape, Layout::kFractal, std::move(dst));
      },
      t.storage());
}

Tensor fractal_to_nchw(const Tensor& t, std::int64_t channels) {
  if (t.layout() != Layout::kFractal) {
    throw ShapeError("fractal_to_nchw expects a FRACTAL tensor");
  }
  const auto n = t.dim(0), c1 = t.dim(1), h = t.dim(2), w = t.dim(3);
  if (channels < 0 || channels > c1 * kFractalC0) {
    throw ShapeError("requested " + std::to_string(channels) + " channels but tensor holds " +
                     std::to_string(c1 * kFractalC0));
  }
  Shape out_shape{n, channels, h, w};
  return std::visit(
      [&](const auto& src) {
        using T = typename std::decay_t<decltype(src)>::value_type;
        std::vector<T> dst(static_cast<std::size_t>(shape_numel(out_shape)));
        for (std::int64_t in = 0; in < n; ++in)
          for (std::int64_t ic = 0; ic < channels; ++ic)
            for (std::int64_t ih = 0; ih < h; ++ih)
              for (std::int64_t iw = 0; iw < w; ++iw) {
                const auto d = ((in * channels + ic) * h + ih) * w + iw;
                const auto s = (((in * c1 + ic / kFractalC0) * h + ih) * w + iw) * kFractalC0 +
                               ic % kFractalC0;
                dst[static_cast<std::size_t>(d)] = src[static_cast<std::size_t>(s)];
              }
        return Tensor(out_shape, Layout::kNCHW, std::move(dst));
      },
      t.storage());
}

}  // namespace winowise
