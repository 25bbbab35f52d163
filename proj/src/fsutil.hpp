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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "labelmap.hpp"

namespace lpref {

// All throw Error(kIo) with the path and errno text.
Bytes read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, ByteView data);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Creates a fresh directory under `parent` with the given prefix.
std::filesystem::path make_unique_dir(const std::filesystem::path& parent,
                                      std::string_view prefix);

// Removes `dir` recursively, ignoring errors.
void remove_tree_quietly(const std::filesystem::path& dir) noexcept;

// Scoped temporary directory.
class TempDir {
 public:
  explicit TempDir(std::string_view prefix = "lpref");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace lpref
