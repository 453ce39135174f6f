/*
 * Copyright 2026 The kgad Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "kgad/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>

#include "kgad/error.hpp"

namespace kgad {

namespace {

constexpr std::array<char, 8> kMagic = {'K', 'G', 'A', 'D', 'C', 'K', 'P', 'T'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

template <typename U>
void put_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw ParseError("truncated checkpoint", 0);
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

void put_string(std::ostream& out, std::string_view s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get_le<std::uint32_t>(in);
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw ParseError("truncated checkpoint", 0);
  return s;
}

}  // namespace

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, Checkpoint::kVersion);
  put_le<std::uint64_t>(out, ckpt.entity_fingerprint);
  put_le<std::uint64_t>(out, ckpt.relation_fingerprint);
  put_string(out, ckpt.config);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& [name, entry] : ckpt.params) {
    put_string(out, name);
    put_le<std::uint32_t>(out, 2);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(entry.value.rows()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(entry.value.cols()));
    for (Index i = 0; i < entry.value.size(); ++i) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(entry.value.data()[i]));
    }
  }
  if (!out) throw Error("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ParseError("not a kgad checkpoint (bad magic)", 0);
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != Checkpoint::kVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version), 0);
  }
  Checkpoint ckpt;
  ckpt.entity_fingerprint = get_le<std::uint64_t>(in);
  ckpt.relation_fingerprint = get_le<std::uint64_t>(in);
  ckpt.config = get_string(in);
  const auto count = get_le<std::uint32_t>(in);
  for (std::uint32_t p = 0; p < count; ++p) {
    std::string name = get_string(in);
    const auto rank = get_le<std::uint32_t>(in);
    if (rank != 2) throw ParseError("parameter '" + name + "' has unsupported rank", 0);
    const auto rows = get_le<std::uint64_t>(in);
    const auto cols = get_le<std::uint64_t>(in);
    if (rows * cols > kMaxElements) throw ParseError("parameter '" + name + "' too large", 0);
    Tensor value(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < value.size(); ++i) {
      value.data()[i] = std::bit_cast<double>(get_le<std::uint64_t>(in));
    }
    ckpt.params.add(name, std::move(value));
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_checkpoint(ckpt, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  try {
    return read_checkpoint(in);
  } catch (const ParseError& e) {
    throw e.in_file(path.string());
  }
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fingerprint(const Vocabulary& vocab) {
  std::uint64_t h = fnv1a("vocab");
  for (const std::string& label : vocab.labels()) {
    h = fnv1a(label, h);
    h = fnv1a(std::string_view("\n", 1), h);
  }
  return h;
}

}  // namespace kgad
