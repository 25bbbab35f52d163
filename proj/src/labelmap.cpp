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

#include "labelmap.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstring>

namespace lpref {

namespace {

// Caps a single map at 64 Mpx so a hostile header cannot trigger a huge
// allocation.
constexpr std::uint64_t kMaxPixels = 64ull << 20;

std::string invalid_class_message(std::uint32_t row, std::uint32_t col,
                                  int value) {
  return "invalid class id " + std::to_string(value) + " at (row " +
         std::to_string(row) + ", col " + std::to_string(col) + ")";
}

// libpng reports errors through longjmp; these callbacks keep the message.
struct PngErrorState {
  char message[256] = {0};
};

void png_error_cb(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  if (state) std::snprintf(state->message, sizeof(state->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t offset;
};

void png_read_cb(png_structp png, png_bytep out, png_size_t len) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->size - cur->offset < len) png_error(png, "unexpected end of data");
  std::memcpy(out, cur->data + cur->offset, len);
  cur->offset += len;
}

void png_write_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void png_flush_cb(png_structp) {}

enum class DecodeStatus { kOk, kError, kNotGray8 };

// Plain C-style body so that longjmp never crosses a live C++ object.
// `pixels` must outlive the call; it is sized from the header before rows
// are read.
DecodeStatus decode_png_raw(ByteView png_bytes, std::uint32_t* width,
                            std::uint32_t* height, Bytes* pixels,
                            PngErrorState* err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, err,
                                           png_error_cb, png_warning_cb);
  if (!png) return DecodeStatus::kError;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return DecodeStatus::kError;
  }
  ReadCursor cursor{png_bytes.data(), png_bytes.size(), 0};
  // volatile: modified between setjmp and a possible longjmp.
  std::vector<png_bytep>* volatile rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    delete rows;
    png_destroy_read_struct(&png, &info, nullptr);
    return DecodeStatus::kError;
  }
  png_set_read_fn(png, &cursor, png_read_cb);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  const bool trns = png_get_valid(png, info, PNG_INFO_tRNS) != 0;
  if (depth != 8 || color != PNG_COLOR_TYPE_GRAY || trns) {
    std::snprintf(err->message, sizeof(err->message),
                  "expected 8-bit single-channel PNG, got bit depth %d, "
                  "color type %d%s",
                  depth, color, trns ? " with transparency" : "");
    png_destroy_read_struct(&png, &info, nullptr);
    return DecodeStatus::kNotGray8;
  }
  if (w == 0 || h == 0 || std::uint64_t(w) * h > kMaxPixels) {
    std::snprintf(err->message, sizeof(err->message),
                  "unsupported image size %ux%u", unsigned(w), unsigned(h));
    png_destroy_read_struct(&png, &info, nullptr);
    return DecodeStatus::kNotGray8;
  }
  pixels->assign(std::size_t(w) * h, 0);
  rows = new std::vector<png_bytep>(h);
  for (png_uint_32 r = 0; r < h; ++r)
    (*rows)[r] = pixels->data() + std::size_t(r) * w;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  delete rows;
  rows = nullptr;
  png_destroy_read_struct(&png, &info, nullptr);
  *width = w;
  *height = h;
  return DecodeStatus::kOk;
}

bool encode_png_raw(std::uint32_t width, std::uint32_t height,
                    std::span<const std::uint8_t> px, Bytes* out,
                    PngErrorState* err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err,
                                            png_error_cb, png_warning_cb);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, png_write_cb, png_flush_cb);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (std::uint32_t r = 0; r < height; ++r) {
    png_write_row(png, const_cast<png_bytep>(px.data() +
                                             std::size_t(r) * width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

ClassId::ClassId(int value) {
  if (value < 0 || value > kMaxClassId) {
    throw Error(ErrorCode::kInvalidClassId,
                "class id " + std::to_string(value) + " outside [0, 13]");
  }
  value_ = static_cast<std::uint8_t>(value);
}

std::vector<ClassId> ClassSet::members() const {
  std::vector<ClassId> out;
  out.reserve(size());
  for (int c = 0; c < kNumClasses; ++c)
    if ((mask_ >> c) & 1u) out.emplace_back(c);
  return out;
}

std::string to_string(Dimensions d) {
  return std::to_string(d.width) + "x" + std::to_string(d.height);
}

LabelMap::LabelMap(std::uint32_t width, std::uint32_t height,
                   std::vector<std::uint8_t> pixels)
    : dims_{width, height}, pixels_(std::move(pixels)) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "label map must have at least one pixel");
  }
  if (pixels_.size() != std::size_t(width) * height) {
    throw Error(ErrorCode::kInvalidArgument,
                "pixel count " + std::to_string(pixels_.size()) +
                    " does not match " + to_string(dims_));
  }
  auto bad = std::find_if(pixels_.begin(), pixels_.end(),
                          [](std::uint8_t v) { return v > kMaxClassId; });
  if (bad != pixels_.end()) {
    const auto idx = std::size_t(bad - pixels_.begin());
    throw InvalidClassIdError(std::uint32_t(idx / width),
                              std::uint32_t(idx % width), *bad);
  }
}

LabelMap::LabelMap(std::uint32_t width, std::uint32_t height, ClassId fill)
    : LabelMap(width, height,
               std::vector<std::uint8_t>(std::size_t(width) * height,
                                         fill.value())) {}

InvalidClassIdError::InvalidClassIdError(std::uint32_t row, std::uint32_t col,
                                         int value)
    : Error(ErrorCode::kInvalidClassId, invalid_class_message(row, col, value)),
      row_(row),
      col_(col),
      value_(value) {}

DimensionMismatchError::DimensionMismatchError(Dimensions actual,
                                               Dimensions expected)
    : Error(ErrorCode::kDimensionMismatch,
            "dimension mismatch: got " + to_string(actual) + ", expected " +
                to_string(expected)),
      actual_(actual),
      expected_(expected) {}

Gray8Image decode_gray8(ByteView png) {
  if (png.size() < 8 || png_sig_cmp(png.data(), 0, 8) != 0) {
    throw Error(ErrorCode::kMalformedImage, "not a PNG image");
  }
  PngErrorState err;
  Gray8Image img;
  switch (decode_png_raw(png, &img.width, &img.height, &img.pixels, &err)) {
    case DecodeStatus::kOk:
      break;
    case DecodeStatus::kNotGray8:
      throw Error(ErrorCode::kMalformedImage, err.message);
    case DecodeStatus::kError:
      throw Error(ErrorCode::kMalformedImage,
                  std::string("PNG decode failed: ") + err.message);
  }
  return img;
}

LabelMap decode_label_map(ByteView png) {
  Gray8Image img = decode_gray8(png);
  return LabelMap(img.width, img.height, std::move(img.pixels));
}

Bytes encode_gray8(std::uint32_t width, std::uint32_t height,
                   std::span<const std::uint8_t> pixels) {
  if (width == 0 || height == 0 ||
      pixels.size() != std::size_t(width) * height) {
    throw Error(ErrorCode::kInvalidArgument,
                "gray8 buffer does not match " +
                    to_string(Dimensions{width, height}));
  }
  Bytes out;
  out.reserve(pixels.size() / 4 + 128);
  PngErrorState err;
  if (!encode_png_raw(width, height, pixels, &out, &err)) {
    throw Error(ErrorCode::kInternal,
                std::string("PNG encode failed: ") + err.message);
  }
  return out;
}

Bytes encode_label_map(const LabelMap& map) {
  return encode_gray8(map.width(), map.height(), map.pixels());
}

void DimensionCheck::require() const {
  if (!ok()) throw DimensionMismatchError(actual, expected);
}

DimensionCheck validate_dimensions(const LabelMap& map, Dimensions expected) {
  return DimensionCheck{map.dimensions(), expected};
}

ClassSet class_set(const LabelMap& map) {
  std::array<bool, kNumClasses> seen{};
  for (std::uint8_t v : map.pixels()) seen[v] = true;
  ClassSet s;
  for (int c = 0; c < kNumClasses; ++c)
    if (seen[c]) s.insert(ClassId(c));
  return s;
}

}  // namespace lpref
