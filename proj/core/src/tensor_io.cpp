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

#include "winowise/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

#include "json.hpp"

namespace winowise {

namespace {

using json = nlohmann::json;

template <class U>
void put_le(std::vector<std::byte>& out, U v) {
  static_assert(std::is_unsigned_v<U>);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
  }
}

template <class U>
U get_le(std::span<const std::byte> in, std::size_t pos) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(std::to_integer<std::uint8_t>(in[pos + i])) << (8 * i);
  }
  return v;
}

template <class T>
auto to_unsigned(T v) {
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<std::uint64_t>(v);
  } else {
    return static_cast<std::make_unsigned_t<T>>(v);
  }
}

}  // namespace

std::vector<std::byte> encode_tensor(const Tensor& t) {
  json header = {{"dtype", std::string(to_string(t.dtype()))},
                 {"shape", t.shape()},
                 {"layout", std::string(to_string(t.layout()))}};
  const std::string text = header.dump();
  if (text.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError("header too large", 4);
  }
  std::vector<std::byte> out;
  out.reserve(8 + text.size() + static_cast<std::size_t>(t.numel()) * element_size(t.dtype()));
  for (char c : kTensorMagic) out.push_back(static_cast<std::byte>(c));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  for (char c : text) out.push_back(static_cast<std::byte>(c));
  std::visit(
      [&](const auto& v) {
        using T = typename std::decay_t<decltype(v)>::value_type;
        for (const auto& x : v) {
          if constexpr (std::is_same_v<T, Dyadic>) {
            put_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.num()));
            put_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.exp()));
          } else {
            put_le(out, to_unsigned(x));
          }
        }
      },
      t.storage());
  return out;
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
  if (bytes.size() < 8) throw FormatError("truncated container preamble", bytes.size());
  for (std::size_t i = 0; i < 4; ++i) {
    if (static_cast<char>(bytes[i]) != kTensorMagic[i]) throw FormatError("bad magic, expected WTNS", i);
  }
  const auto header_len = get_le<std::uint32_t>(bytes, 4);
  if (bytes.size() - 8 < header_len) throw FormatError("truncated header", bytes.size());
  const std::string text(reinterpret_cast<const char*>(bytes.data() + 8), header_len);

  json header;
  try {
    header = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed header JSON: ") + e.what(), 8 + e.byte);
  }
  DType dtype;
  Layout layout;
  Shape shape;
  try {
    dtype = parse_dtype(header.at("dtype").get<std::string>());
    layout = parse_layout(header.at("layout").get<std::string>());
    shape = header.at("shape").get<Shape>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid header field: ") + e.what(), 8);
  } catch (const ShapeError& e) {
    throw FormatError(e.what(), 8);
  }

  const std::size_t payload_at = 8 + header_len;
  std::int64_t numel = 0;
  try {
    numel = shape_numel(shape);
  } catch (const ShapeError& e) {
    throw FormatError(e.what(), 8);
  }
  const auto esize = element_size(dtype);
  const auto available = bytes.size() - payload_at;
  const auto expected = static_cast<std::uint64_t>(numel) * esize;
  if (available < expected) {
    throw FormatError("truncated payload: header declares " + std::to_string(numel) +
                          " elements, only " + std::to_string(available / esize) + " stored",
                      bytes.size());
  }
  if (available > expected) {
    throw FormatError("trailing bytes after payload", payload_at + expected);
  }

  auto read_payload = [&]<class T>() {
    std::vector<T> v(static_cast<std::size_t>(numel));
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto pos = payload_at + i * esize;
      if constexpr (std::is_same_v<T, Dyadic>) {
        const auto num = static_cast<std::int64_t>(get_le<std::uint64_t>(bytes, pos));
        const auto exp = static_cast<std::int64_t>(get_le<std::uint64_t>(bytes, pos + 8));
        try {
          v[i] = Dyadic(num, exp);
        } catch (const Error& e) {
          throw FormatError(e.what(), pos);
        }
      } else if constexpr (std::is_same_v<T, double>) {
        v[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
      } else {
        using U = std::make_unsigned_t<T>;
        v[i] = static_cast<T>(get_le<U>(bytes, pos));
      }
    }
    return Tensor::Storage(std::move(v));
  };

  Tensor::Storage storage;
  switch (dtype) {
    case DType::kF64: storage = read_payload.operator()<double>(); break;
    case DType::kI8: storage = read_payload.operator()<std::int8_t>(); break;
    case DType::kI16: storage = read_payload.operator()<std::int16_t>(); break;
    case DType::kI32: storage = read_payload.operator()<std::int32_t>(); break;
    case DType::kRational: storage = read_payload.operator()<Dyadic>(); break;
  }
  try {
    return Tensor(std::move(shape), layout, std::move(storage));
  } catch (const ShapeError& e) {
    throw FormatError(e.what(), 8);
  }
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensor(std::as_bytes(std::span<const char>(raw)));
}

namespace {

std::filesystem::path temp_sibling(const std::filesystem::path& path) {
  std::random_device rd;
  auto tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  return tmp;
}

void write_bytes_atomic(const std::filesystem::path& path, const char* data, std::size_t n) {
  const auto tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(data, static_cast<std::streamsize>(n));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(t);
  write_bytes_atomic(path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void write_text_atomic(const std::filesystem::path& path, const std::string& contents) {
  write_bytes_atomic(path, contents.data(), contents.size());
}

}  // namespace winowise
