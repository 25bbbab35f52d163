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

#include "metrics.hpp"

namespace lpref {

namespace {

void require_same_dimensions(const LabelMap& pred, const LabelMap& gt) {
  validate_dimensions(pred, gt.dimensions()).require();
}

}  // namespace

ClassSet class_union(const LabelMap& pred, const LabelMap& gt) {
  require_same_dimensions(pred, gt);
  return class_set(pred) | class_set(gt);
}

ConfusionCounts confusion_counts(const LabelMap& pred, const LabelMap& gt) {
  require_same_dimensions(pred, gt);

  // matrix[gt][pred]; one pass over the pixels.
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> matrix{};
  const auto p = pred.pixels();
  const auto g = gt.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) ++matrix[g[i]][p[i]];

  std::array<ClassTally, kNumClasses> tallies{};
  ClassSet present;
  for (int c = 0; c < kNumClasses; ++c) {
    std::uint64_t gt_total = 0, pred_total = 0;
    for (int k = 0; k < kNumClasses; ++k) {
      gt_total += matrix[c][k];
      pred_total += matrix[k][c];
    }
    const std::uint64_t tp = matrix[c][c];
    tallies[c] = ClassTally{tp, pred_total - tp, gt_total - tp};
    if (gt_total + pred_total > 0) present.insert(ClassId(c));
  }
  return ConfusionCounts(present, tallies);
}

double dice_per_class(const ConfusionCounts& counts, ClassId c) {
  if (!counts.class_union().contains(c)) {
    throw Error(ErrorCode::kClassNotInUnion,
                "class " + std::to_string(c.value()) +
                    " is in neither the prediction nor the ground truth");
  }
  const ClassTally& t = counts[c];
  const std::uint64_t num = 2 * t.tp;
  const std::uint64_t den = num + t.fn_ + t.fp;
  return static_cast<double>(num) / static_cast<double>(den);
}

ImageScore image_mdsc(const ConfusionCounts& counts) {
  ImageScore out;
  out.class_union = counts.class_union();
  double sum = 0.0;
  for (ClassId c : out.class_union.members()) {
    const double d = dice_per_class(counts, c);
    out.per_class_dice[c.value()] = d;
    sum += d;
  }
  out.mdsc = sum / out.class_union.size();
  return out;
}

ImageScore image_mdsc(const LabelMap& pred, const LabelMap& gt) {
  return image_mdsc(confusion_counts(pred, gt));
}

double dataset_accuracy(std::span<const double> mdsc_values) {
  if (mdsc_values.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no images to average");
  }
  long double sum = 0.0L;
  for (double v : mdsc_values) sum += v;
  return static_cast<double>(sum / mdsc_values.size());
}

double dataset_accuracy(std::span<const ImageScore> scores) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& s : scores) values.push_back(s.mdsc);
  return dataset_accuracy(std::span<const double>(values));
}

Milliseconds mean_inference_time(Milliseconds total, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kZeroImages, "image count is zero");
  if (total.count() < 0) {
    throw Error(ErrorCode::kInvalidArgument, "total time is negative");
  }
  return total / static_cast<double>(n);
}

double score(double accuracy, Milliseconds mean_time) {
  if (!(mean_time.count() > 0)) {
    throw Error(ErrorCode::kNonPositiveTime,
                "mean inference time must be positive");
  }
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "accuracy outside [0, 1]");
  }
  const std::chrono::duration<double> seconds = mean_time;
  return accuracy / seconds.count();
}

nlohmann::json scoring_report(const DatasetScore& dataset,
                              std::span<const NamedImageScore> per_image) {
  nlohmann::json images = nlohmann::json::array();
  for (const auto& item : per_image) {
    nlohmann::json classes = nlohmann::json::array();
    nlohmann::json dice = nlohmann::json::object();
    for (ClassId c : item.score.class_union.members()) {
      classes.push_back(c.value());
      dice[std::to_string(c.value())] = item.score.per_class_dice[c.value()];
    }
    images.push_back({{"name", item.name},
                      {"mdsc", item.score.mdsc},
                      {"class_union", std::move(classes)},
                      {"per_class_dice", std::move(dice)}});
  }
  return {{"accuracy", dataset.accuracy},
          {"mean_inference_time_ms", dataset.mean_inference_time.count()},
          {"score", dataset.score},
          {"per_image", std::move(images)}};
}

}  // namespace lpref
