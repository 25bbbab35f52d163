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


#include "fixtures.hpp"

#include <random>

#include <nlohmann/json.hpp>

#include "fsutil.hpp"

namespace lpref {

namespace {

// Bounded draws are done by hand: std distributions differ between
// standard libraries, and fixtures must be byte-identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = std::uint64_t(hi - lo) + 1;
    return lo + std::int64_t(engine_() % span);
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

void FixtureSpec::validate() const {
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "count must be positive");
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "width and height must be positive, got " +
                    to_string(Dimensions{width, height}));
  }
}

LabelMap fixture_map(const FixtureSpec& spec, std::size_t index) {
  spec.validate();
  Rng rng(mix(spec.seed, index));
  const std::int64_t w = spec.width, h = spec.height;
  std::vector<std::uint8_t> px(std::size_t(w) * h,
                               std::uint8_t(rng.between(0, kMaxClassId)));
  const int shapes = int(rng.between(2, 6));
  for (int s = 0; s < shapes; ++s) {
    const auto cls = std::uint8_t(rng.between(0, kMaxClassId));
    const bool ellipse = rng.between(0, 1) == 1;
    const std::int64_t cx = rng.between(0, w - 1), cy = rng.between(0, h - 1);
    const std::int64_t rx = rng.between(std::max<std::int64_t>(1, w / 16),
                                        std::max<std::int64_t>(1, w / 4));
    const std::int64_t ry = rng.between(std::max<std::int64_t>(1, h / 16),
                                        std::max<std::int64_t>(1, h / 4));
    for (std::int64_t y = std::max<std::int64_t>(0, cy - ry);
         y <= std::min(h - 1, cy + ry); ++y) {
      for (std::int64_t x = std::max<std::int64_t>(0, cx - rx);
           x <= std::min(w - 1, cx + rx); ++x) {
        if (ellipse) {
          const std::int64_t dx = x - cx, dy = y - cy;
          if (dx * dx * ry * ry + dy * dy * rx * rx > rx * rx * ry * ry) continue;
        }
        px[std::size_t(y) * w + x] = cls;
      }
    }
  }
  return LabelMap(spec.width, spec.height, std::move(px));
}

Bytes fixture_image(const LabelMap& map) {
  std::vector<std::uint8_t> px(map.pixels().begin(), map.pixels().end());
  for (auto& v : px) v = std::uint8_t(v * 16 + 8);
  return encode_gray8(map.width(), map.height(), px);
}

std::vector<std::string> fixture_names(std::size_t count) {
  std::size_t digits = 4;
  for (std::size_t n = count - 1; n >= 10000; n /= 10) ++digits;
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string num = std::to_string(i);
    names.push_back(std::string(digits - std::min(digits, num.size()), '0') +
                    num + ".png");
  }
  return names;
}

std::vector<std::string> generate_fixtures(const FixtureSpec& spec,
                                           const std::filesystem::path& out) {
  spec.validate();
  const auto gt_dir = out / "ground_truth";
  const auto img_dir = out / "images";
  std::error_code ec;
  std::filesystem::create_directories(gt_dir, ec);
  if (!ec) std::filesystem::create_directories(img_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create " + out.string() + ": " +
                                    ec.message());
  }
  const auto names = fixture_names(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const LabelMap map = fixture_map(spec, i);
    write_file(gt_dir / names[i], encode_label_map(map));
    write_file(img_dir / names[i], fixture_image(map));
  }
  const nlohmann::json manifest = {{"seed", spec.seed},
                                   {"count", spec.count},
                                   {"width", spec.width},
                                   {"height", spec.height},
                                   {"names", names}};
  write_text_file(out / "fixtures.json", manifest.dump(2) + "\n");
  return names;
}

}  // namespace lpref
