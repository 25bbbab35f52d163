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


// Synthetic test sets: seeded multi-class label maps standing in for the
// hidden competition data.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "labelmap.hpp"

namespace lpref {

struct FixtureSpec {
  std::uint64_t seed = 1;
  std::size_t count = 600;
  std::uint32_t width = 512;
  std::uint32_t height = 512;

  // Throws Error(kInvalidArgument) for a zero count or dimension.
  void validate() const;
};

// Map `index` of the set; depends only on (seed, index, width, height).
LabelMap fixture_map(const FixtureSpec& spec, std::size_t index);

// Input image for a label map: sample = class * 16 + 8.
Bytes fixture_image(const LabelMap& map);

// "0000.png", "0001.png", ...
std::vector<std::string> fixture_names(std::size_t count);

// Writes <out>/ground_truth/*.png, <out>/images/*.png and
// <out>/fixtures.json. Same spec, same bytes. Returns the file names.
std::vector<std::string> generate_fixtures(const FixtureSpec& spec,
                                           const std::filesystem::path& out);

}  // namespace lpref
