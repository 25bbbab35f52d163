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

#include "error.hpp"

namespace lpref {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedImage: return "MalformedImage";
    case ErrorCode::kInvalidClassId: return "InvalidClassId";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kClassNotInUnion: return "ClassNotInUnion";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kZeroImages: return "ZeroImages";
    case ErrorCode::kNonPositiveTime: return "NonPositiveTime";
    case ErrorCode::kCorruptArchive: return "CorruptArchive";
    case ErrorCode::kMissingManifest: return "MissingManifest";
    case ErrorCode::kPathEscape: return "PathEscape";
    case ErrorCode::kManifestInvalid: return "ManifestInvalid";
    case ErrorCode::kSpawnFailure: return "SpawnFailure";
    case ErrorCode::kMalformedSentinel: return "MalformedSentinel";
    case ErrorCode::kWrongOutputCount: return "WrongOutputCount";
    case ErrorCode::kOutputInvalid: return "OutputInvalid";
    case ErrorCode::kDuplicateSubmissionId: return "DuplicateSubmissionId";
    case ErrorCode::kUnknownSubmission: return "UnknownSubmission";
    case ErrorCode::kStorageFailure: return "StorageFailure";
    case ErrorCode::kWorkerUnreachable: return "WorkerUnreachable";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kUnknownTrack: return "UnknownTrack";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kProtocol: return "Protocol";
    case ErrorCode::kEmptyQueue: return "EmptyQueue";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

ErrorCode error_code_from_name(std::string_view name) {
  for (int v = 1; v <= int(ErrorCode::kEmptyQueue); ++v) {
    if (error_code_name(ErrorCode(v)) == name) return ErrorCode(v);
  }
  return ErrorCode::kInternal;
}

}  // namespace lpref
