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

#include "fsutil.hpp"

#include <fcntl.h>
#include <stdlib.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>

namespace lpref {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_error(const std::string& what, const fs::path& path) {
  throw Error(ErrorCode::kIo,
              what + " " + path.string() + ": " + std::strerror(errno));
}

}  // namespace

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("cannot open", path);
  Bytes out((std::istreambuf_iterator<char>(in)),
            std::istreambuf_iterator<char>());
  if (in.bad()) io_error("cannot read", path);
  return out;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("cannot open", path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_error("cannot create", path);
  out.write(reinterpret_cast<const char*>(data.data()),
            std::streamsize(data.size()));
  if (!out.flush()) io_error("cannot write", path);
}

void write_text_file(const fs::path& path, std::string_view text) {
  write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()),
                            text.size()));
}

fs::path make_unique_dir(const fs::path& parent, std::string_view prefix) {
  std::error_code ec;
  fs::create_directories(parent, ec);
  std::string tmpl = (parent / (std::string(prefix) + "-XXXXXX")).string();
  if (!mkdtemp(tmpl.data())) io_error("cannot create directory under", parent);
  return fs::path(tmpl);
}

void remove_tree_quietly(const fs::path& dir) noexcept {
  std::error_code ec;
  fs::remove_all(dir, ec);
}

TempDir::TempDir(std::string_view prefix)
    : path_(make_unique_dir(fs::temp_directory_path(), prefix)) {}

TempDir::~TempDir() { remove_tree_quietly(path_); }

}  // namespace lpref
