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

#include <compare>
#include <cstdint>
#include <string>

namespace winowise {

// Exact dyadic rational: num * 2^-exp. Canonical form keeps exp >= 0 and
// num odd whenever exp > 0; zero is (0, 0).
class Dyadic {
 public:
  constexpr Dyadic() = default;
  Dyadic(std::int64_t num, std::int64_t exp = 0);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t exp() const noexcept { return exp_; }

  bool is_integer() const noexcept { return exp_ == 0; }
  double to_double() const noexcept;
  std::string to_string() const;

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
  Dyadic operator-() const;

  Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }
  Dyadic& operator*=(const Dyadic& o) { return *this = *this * o; }

  friend bool operator==(const Dyadic&, const Dyadic&) = default;
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t exp_ = 0;
};

}  // namespace winowise
