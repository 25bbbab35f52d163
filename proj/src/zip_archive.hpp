// Copyright 2026 The lpref Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal zip container support: stored and deflated entries, no zip64, no
// encryption. Enough for submission archives and the worker's output bundle.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "labelmap.hpp"

namespace lpref {

struct ZipEntry {
  std::string name;
  std::uint16_t method = 0;  // 0 stored, 8 deflate
  std::uint32_t crc32 = 0;
  std::uint64_t compressed_size = 0;
  std::uint64_t uncompressed_size = 0;
  std::uint64_t local_header_offset = 0;
  std::uint32_t unix_mode = 0;  // 0 when the archive carries none
  bool is_directory() const { return !name.empty() && name.back() == '/'; }
};

// Read-only view over an in-memory archive. The bytes must outlive the
// reader. Construction parses the central directory and throws
// Error(kCorruptArchive) if it is inconsistent.
class ZipReader {
 public:
  explicit ZipReader(ByteView archive);

  const std::vector<ZipEntry>& entries() const { return entries_; }
  std::optional<std::size_t> find(const std::string& name) const;

  // Decompresses and CRC-checks one entry. `max_size` bounds the inflated
  // size.
  Bytes extract(std::size_t index,
                std::uint64_t max_size = std::uint64_t(1) << 32) const;

 private:
  ByteView data_;
  std::vector<ZipEntry> entries_;
};

class ZipWriter {
 public:
  // `deflate` false stores entries uncompressed.
  void add(const std::string& name, ByteView content, bool deflate = true,
           std::uint32_t unix_mode = 0100644);
  Bytes finish();

 private:
  Bytes out_;
  std::vector<ZipEntry> central_;
  bool finished_ = false;
};

}  // namespace lpref
