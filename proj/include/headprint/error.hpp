// Copyright 2026 The headprint Authors
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

namespace headprint {

enum class ErrorKind {
  kInvalidArgument,
  kDegenerateOrientation,
  kEmptyWindow,
  kInsufficientData,
  kFrameMismatch,
  kAlignment,
  kDegenerateSaliency,
  kNoOverlap,
  kDegenerateTraining,
  kDegenerate,
  kFormat,
  kIo,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kDegenerateOrientation: return "degenerate_orientation";
    case ErrorKind::kEmptyWindow: return "empty_window";
    case ErrorKind::kInsufficientData: return "insufficient_data";
    case ErrorKind::kFrameMismatch: return "frame_mismatch";
    case ErrorKind::kAlignment: return "alignment";
    case ErrorKind::kDegenerateSaliency: return "degenerate_saliency";
    case ErrorKind::kNoOverlap: return "no_overlap";
    case ErrorKind::kDegenerateTraining: return "degenerate_training";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace headprint
