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

#include <string>

#include "labelmap.hpp"

namespace lpref {

// Lowercase hex SHA-256.
std::string sha256_hex(ByteView data);

// "sha256:<hex>", the form used for blob references and output digests.
inline std::string content_ref(ByteView data) {
  return "sha256:" + sha256_hex(data);
}

}  // namespace lpref
