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

// Segmentation accuracy and latency scoring.
//
// Accuracy of one image is the mean Dice coefficient over the union of the
// classes present in the prediction and in the ground truth, so a spurious
// class costs a full zero term. Dataset accuracy is the unweighted mean of
// the per-image values. The competition score is accuracy (a fraction)
// divided by mean inference time in seconds.

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "labelmap.hpp"

namespace lpref {

using Milliseconds = std::chrono::duration<double, std::milli>;

struct ClassTally {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn_ = 0;
  friend bool operator==(const ClassTally&, const ClassTally&) = default;
};

// Per-class TP/FP/FN for one (prediction, ground truth) pair. Tallies for
// classes outside the union are all zero.
class ConfusionCounts {
 public:
  ConfusionCounts(ClassSet class_union,
                  const std::array<ClassTally, kNumClasses>& tallies)
      : union_(class_union), tallies_(tallies) {}

  ClassSet class_union() const { return union_; }
  const ClassTally& operator[](ClassId c) const { return tallies_[c.value()]; }
  const std::array<ClassTally, kNumClasses>& tallies() const {
    return tallies_;
  }

  friend bool operator==(const ConfusionCounts&,
                         const ConfusionCounts&) = default;

 private:
  ClassSet union_;
  std::array<ClassTally, kNumClasses> tallies_;
};

struct ImageScore {
  ClassSet class_union;
  // Indexed by class id; only members of class_union are meaningful.
  std::array<double, kNumClasses> per_class_dice{};
  double mdsc = 0.0;
};

struct DatasetScore {
  double accuracy = 0.0;
  Milliseconds mean_inference_time{0};
  double score = 0.0;
  std::size_t image_count = 0;
};

// Throws DimensionMismatchError when the maps differ in size.
ClassSet class_union(const LabelMap& pred, const LabelMap& gt);

ConfusionCounts confusion_counts(const LabelMap& pred, const LabelMap& gt);

// 2tp / (2tp + fn + fp). Throws Error(kClassNotInUnion) for classes that
// appear in neither map.
double dice_per_class(const ConfusionCounts& counts, ClassId c);

ImageScore image_mdsc(const LabelMap& pred, const LabelMap& gt);
ImageScore image_mdsc(const ConfusionCounts& counts);

// Throws Error(kEmptyDataset) on an empty sequence.
double dataset_accuracy(std::span<const ImageScore> scores);
double dataset_accuracy(std::span<const double> mdsc_values);

// Throws Error(kZeroImages) when n == 0.
Milliseconds mean_inference_time(Milliseconds total, std::size_t n);

// Accuracy per second. Throws Error(kNonPositiveTime) when mean_time <= 0.
double score(double accuracy, Milliseconds mean_time);

// Scoring report as written by the offline scorer and stored by the referee.
struct NamedImageScore {
  std::string name;
  ImageScore score;
};

nlohmann::json scoring_report(const DatasetScore& dataset,
                              std::span<const NamedImageScore> per_image);

}  // namespace lpref
