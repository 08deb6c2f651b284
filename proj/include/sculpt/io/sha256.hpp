// Copyright 2026 The sculpt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "sculpt/core/error.hpp"

namespace sculpt {

inline std::string sha256_hex(const void* data, std::size_t size) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int digest_len = 0;
  if (EVP_Digest(data, size, digest.data(), &digest_len, EVP_sha256(),
                 nullptr) != 1)
    throw Error("sha256_hex: digest failed");
  std::string hex;
  hex.reserve(2 * digest_len);
  static const char* k = "0123456789abcdef";
  for (unsigned int i = 0; i < digest_len; ++i) {
    hex.push_back(k[digest[i] >> 4]);
    hex.push_back(k[digest[i] & 0xf]);
  }
  return hex;
}

inline std::string sha256_hex(const std::string& bytes) {
  return sha256_hex(bytes.data(), bytes.size());
}

inline std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("sha256_file: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

}  // namespace sculpt
