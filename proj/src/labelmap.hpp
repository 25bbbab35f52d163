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

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace lpref {

// Number of labels in the disaster-scene vocabulary (0 background .. 13
// vehicle).
inline constexpr int kNumClasses = 14;
inline constexpr std::uint8_t kMaxClassId = kNumClasses - 1;

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

class ClassId {
 public:
  // Throws Error(kInvalidClassId) outside [0, 13].
  explicit ClassId(int value);

  constexpr std::uint8_t value() const noexcept { return value_; }
  friend constexpr bool operator==(ClassId, ClassId) = default;
  friend constexpr auto operator<=>(ClassId, ClassId) = default;

 private:
  std::uint8_t value_;
};

// Set of class ids stored as a 14-bit mask.
class ClassSet {
 public:
  constexpr ClassSet() = default;
  static constexpr ClassSet from_mask(std::uint16_t mask) {
    ClassSet s;
    s.mask_ = mask & kAllMask;
    return s;
  }

  void insert(ClassId c) { mask_ |= std::uint16_t(1u << c.value()); }
  bool contains(ClassId c) const {
    return (mask_ >> c.value()) & 1u;
  }
  constexpr int size() const { return std::popcount(mask_); }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr std::uint16_t mask() const { return mask_; }

  // Members in ascending order.
  std::vector<ClassId> members() const;

  friend constexpr ClassSet operator|(ClassSet a, ClassSet b) {
    return from_mask(a.mask_ | b.mask_);
  }
  friend constexpr bool operator==(ClassSet, ClassSet) = default;

 private:
  static constexpr std::uint16_t kAllMask = (1u << kNumClasses) - 1;
  std::uint16_t mask_ = 0;
};

struct Dimensions {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

std::string to_string(Dimensions d);

// Row-major W x H grid of class ids. Always satisfies its invariants: the
// constructor rejects wrong lengths and out-of-range values.
class LabelMap {
 public:
  LabelMap(std::uint32_t width, std::uint32_t height,
           std::vector<std::uint8_t> pixels);
  // Map filled with a single class.
  LabelMap(std::uint32_t width, std::uint32_t height, ClassId fill);

  std::uint32_t width() const { return dims_.width; }
  std::uint32_t height() const { return dims_.height; }
  Dimensions dimensions() const { return dims_; }
  std::size_t pixel_count() const { return pixels_.size(); }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  ClassId at(std::uint32_t row, std::uint32_t col) const {
    return ClassId(pixels_[std::size_t(row) * dims_.width + col]);
  }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  Dimensions dims_;
  std::vector<std::uint8_t> pixels_;
};

// Decode failure naming the first pixel above the class range.
class InvalidClassIdError : public Error {
 public:
  InvalidClassIdError(std::uint32_t row, std::uint32_t col, int value);
  std::uint32_t row() const { return row_; }
  std::uint32_t col() const { return col_; }
  int value() const { return value_; }

 private:
  std::uint32_t row_, col_;
  int value_;
};

class DimensionMismatchError : public Error {
 public:
  DimensionMismatchError(Dimensions actual, Dimensions expected);
  Dimensions actual() const { return actual_; }
  Dimensions expected() const { return expected_; }

 private:
  Dimensions actual_, expected_;
};

struct Gray8Image {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  Bytes pixels;
};

// Any 8-bit single-channel PNG, samples unchecked.
Gray8Image decode_gray8(ByteView png);

// Decodes an 8-bit single-channel PNG. Throws Error(kMalformedImage) for
// anything else and InvalidClassIdError for samples above 13.
LabelMap decode_label_map(ByteView png);

// Encodes as 8-bit grayscale PNG. Output is deterministic for a given map.
Bytes encode_label_map(const LabelMap& map);
// Same encoder for arbitrary 8-bit gray samples (fixture input images).
Bytes encode_gray8(std::uint32_t width, std::uint32_t height,
                   std::span<const std::uint8_t> pixels);

struct DimensionCheck {
  Dimensions actual;
  Dimensions expected;
  bool ok() const { return actual == expected; }
  // Throws DimensionMismatchError when !ok().
  void require() const;
};

DimensionCheck validate_dimensions(const LabelMap& map, Dimensions expected);

ClassSet class_set(const LabelMap& map);

}  // namespace lpref
