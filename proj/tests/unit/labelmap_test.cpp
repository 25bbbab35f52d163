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


#include <random>
#include <set>

#include <gtest/gtest.h>

#include "labelmap.hpp"
#include "pil_fixtures.hpp"
#include "test_support.hpp"

namespace lpref {
namespace {

using testing::random_map;

template <std::size_t N>
ByteView bytes(const std::uint8_t (&a)[N]) {
  return ByteView(a, N);
}

TEST(ClassId, AcceptsVocabularyRange) {
  EXPECT_EQ(ClassId(0).value(), 0);
  EXPECT_EQ(ClassId(13).value(), 13);
  EXPECT_THROW(ClassId(14), Error);
  EXPECT_THROW(ClassId(-1), Error);
  try {
    ClassId bad(200);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidClassId);
  }
}

TEST(LabelMap, RejectsWrongLengthAndValues) {
  EXPECT_THROW(LabelMap(2, 2, std::vector<std::uint8_t>{0, 0, 0}), Error);
  EXPECT_THROW(LabelMap(0, 2, std::vector<std::uint8_t>{}), Error);
  try {
    LabelMap(2, 2, std::vector<std::uint8_t>{0, 0, 0, 14});
    FAIL() << "expected InvalidClassIdError";
  } catch (const InvalidClassIdError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidClassId);
    EXPECT_EQ(e.row(), 1u);
    EXPECT_EQ(e.col(), 1u);
    EXPECT_EQ(e.value(), 14);
  }
}

TEST(DecodeLabelMap, ReadsIndependentlyEncodedGrayPng) {
  const LabelMap m = decode_label_map(bytes(testing::kPilGray3x2));
  EXPECT_EQ(m.width(), 3u);
  EXPECT_EQ(m.height(), 2u);
  const std::vector<std::uint8_t> want{0, 1, 2, 13, 12, 11};
  EXPECT_TRUE(std::equal(want.begin(), want.end(), m.pixels().begin(),
                         m.pixels().end()));
  EXPECT_EQ(m.at(1, 0).value(), 13);
}

TEST(DecodeLabelMap, ReportsFirstOutOfRangeSample) {
  try {
    decode_label_map(bytes(testing::kPilValue14));
    FAIL() << "expected InvalidClassIdError";
  } catch (const InvalidClassIdError& e) {
    EXPECT_EQ(e.row(), 0u);
    EXPECT_EQ(e.col(), 1u);
    EXPECT_EQ(e.value(), 14);
  }
}

TEST(DecodeLabelMap, RejectsNonGray8Formats) {
  for (ByteView png : {bytes(testing::kPilRgb), bytes(testing::kPilGray16),
                       bytes(testing::kPilPalette),
                       bytes(testing::kPilGrayAlpha)}) {
    try {
      decode_label_map(png);
      FAIL() << "expected MalformedImage";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kMalformedImage) << e.what();
    }
  }
}

TEST(DecodeLabelMap, RejectsGarbageAndTruncation) {
  const Bytes junk{'n', 'o', 't', ' ', 'p', 'n', 'g', '!', '!'};
  EXPECT_THROW(decode_label_map(junk), Error);
  Bytes truncated(std::begin(testing::kPilGray3x2),
                  std::end(testing::kPilGray3x2) - 20);
  try {
    decode_label_map(truncated);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedImage);
  }
  EXPECT_THROW(decode_label_map(Bytes{}), Error);
}

TEST(EncodeLabelMap, RoundTripsSmallAndSaturatedMaps) {
  const LabelMap one(1, 1, ClassId(0));
  EXPECT_EQ(decode_label_map(encode_label_map(one)), one);
  const LabelMap full(512, 512, ClassId(13));
  EXPECT_EQ(decode_label_map(encode_label_map(full)), full);
  const LabelMap mixed(2, 2, std::vector<std::uint8_t>{0, 13, 7, 1});
  EXPECT_EQ(decode_label_map(encode_label_map(mixed)), mixed);
}

TEST(EncodeLabelMap, IsDeterministic) {
  std::mt19937_64 rng(5);
  const LabelMap m = random_map(rng, 33, 17, 14);
  EXPECT_EQ(encode_label_map(m), encode_label_map(m));
}

TEST(EncodeLabelMap, PropertyRoundTripOnRandomMaps) {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> dim(1, 16), classes(1, 14);
  for (int i = 0; i < 1000; ++i) {
    const LabelMap m =
        random_map(rng, std::uint32_t(dim(rng)), std::uint32_t(dim(rng)), classes(rng));
    ASSERT_EQ(decode_label_map(encode_label_map(m)), m) << "iteration " << i;
  }
}

TEST(ValidateDimensions, ExactMatchOnly) {
  EXPECT_TRUE(validate_dimensions(LabelMap(512, 512, ClassId(0)), {512, 512}).ok());
  const auto off = validate_dimensions(LabelMap(511, 512, ClassId(0)), {512, 512});
  EXPECT_FALSE(off.ok());
  EXPECT_EQ(off.actual, (Dimensions{511, 512}));
  try {
    validate_dimensions(LabelMap(1024, 1024, ClassId(0)), {512, 512}).require();
    FAIL();
  } catch (const DimensionMismatchError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
    EXPECT_EQ(e.actual(), (Dimensions{1024, 1024}));
    EXPECT_EQ(e.expected(), (Dimensions{512, 512}));
  }
}

TEST(ClassSet, MatchesDistinctValues) {
  EXPECT_EQ(class_set(LabelMap(2, 2, ClassId(0))).mask(), 1u);
  const auto s = class_set(LabelMap(2, 2, std::vector<std::uint8_t>{0, 13, 7, 1}));
  std::vector<int> ids;
  for (ClassId c : s.members()) ids.push_back(c.value());
  EXPECT_EQ(ids, (std::vector<int>{0, 1, 7, 13}));
}

TEST(ClassSet, PropertyEqualsNaiveScan) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 200; ++i) {
    const LabelMap m = random_map(rng, 32, 32, 1 + int(rng() % 14));
    std::set<int> naive;
    for (std::uint32_t r = 0; r < 32; ++r)
      for (std::uint32_t c = 0; c < 32; ++c) naive.insert(m.at(r, c).value());
    const auto s = class_set(m);
    ASSERT_EQ(std::size_t(s.size()), naive.size());
    for (int v : naive) ASSERT_TRUE(s.contains(ClassId(v)));
  }
}

}  // namespace
}  // namespace lpref
