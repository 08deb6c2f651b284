// Copyright 2026 The sculpt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace sculpt {

/// Base class for all engine errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
struct InvalidArgument : Error {
  using Error::Error;
};

/// Input data is degenerate (zero variance, collinear points, ...).
struct DegenerateInput : Error {
  using Error::Error;
};

/// Landmark alignment could not intersect a keypoint ray with the mesh.
struct AlignmentFailure : Error {
  AlignmentFailure(const std::string& what, int keypoint)
      : Error(what), keypoint_index(keypoint) {}
  int keypoint_index = -1;
};

/// The synthetic oracle has no target registered for the requested camera.
struct MissingTarget : Error {
  using Error::Error;
};

/// A guidance provider does not implement the requested capability.
struct UnsupportedCapability : Error {
  using Error::Error;
};

/// File or stream I/O failed.
struct IoError : Error {
  using Error::Error;
};

/// Configuration is malformed or fails validation.
struct ConfigError : Error {
  using Error::Error;
};

/// An optimization stage failed; carries stage name and iteration index.
struct StageError : Error {
  StageError(const std::string& what, std::string stage_name, long iter)
      : Error(what), stage(std::move(stage_name)), iteration(iter) {}
  std::string stage;
  long iteration = -1;
};

}  // namespace sculpt
