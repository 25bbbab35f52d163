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

#include <stdexcept>
#include <string>
#include <string_view>

namespace lpref {

// Error kinds surfaced by the core. The numeric values are mirrored by
// lpref_status in the public C header; keep them in sync.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kMalformedImage = 2,
  kInvalidClassId = 3,
  kDimensionMismatch = 4,
  kClassNotInUnion = 5,
  kEmptyDataset = 6,
  kZeroImages = 7,
  kNonPositiveTime = 8,
  kCorruptArchive = 9,
  kMissingManifest = 10,
  kPathEscape = 11,
  kManifestInvalid = 12,
  kSpawnFailure = 13,
  kMalformedSentinel = 14,
  kWrongOutputCount = 15,
  kOutputInvalid = 16,
  kDuplicateSubmissionId = 17,
  kUnknownSubmission = 18,
  kStorageFailure = 19,
  kWorkerUnreachable = 20,
  kInvalidRange = 21,
  kUnknownTrack = 22,
  kIo = 23,
  kConfig = 24,
  kProtocol = 25,
  kEmptyQueue = 26,
  kInternal = 99,
};

std::string_view error_code_name(ErrorCode code);
// Inverse of error_code_name; kInternal for unknown names.
ErrorCode error_code_from_name(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lpref
