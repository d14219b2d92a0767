/*
 * Copyright 2026 The aec-toolkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef AEC_ERRORS_HPP_
#define AEC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace aec {

// Base class for all toolkit errors.  Subclasses name the failure mode so
// callers can catch the ones they can recover from.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define AEC_DEFINE_ERROR(NAME)                                 \
  class NAME : public Error {                                  \
   public:                                                     \
    explicit NAME(const std::string& msg) : Error(msg) {}      \
  }

AEC_DEFINE_ERROR(ShortInput);        // input shorter than one analysis window
AEC_DEFINE_ERROR(NoSignal);          // silent input where signal is required
AEC_DEFINE_ERROR(BadLag);            // cross-correlation lag out of range
AEC_DEFINE_ERROR(RateMismatch);      // sample rates differ
AEC_DEFINE_ERROR(ShapeMismatch);     // matrix/tensor shapes incompatible
AEC_DEFINE_ERROR(Infeasible);        // constraint set admits no solution
AEC_DEFINE_ERROR(MissingStems);      // dataset example lacks required stems
AEC_DEFINE_ERROR(LatentMismatch);    // latent sequences of unequal length
AEC_DEFINE_ERROR(CorruptCheckpoint); // bad magic, version, or truncation
AEC_DEFINE_ERROR(MissingArtifact);   // referenced checkpoint/dataset absent
AEC_DEFINE_ERROR(ConfigError);       // invalid or unknown configuration
AEC_DEFINE_ERROR(IoError);           // file read/write failure

#undef AEC_DEFINE_ERROR

// Training divergence carries the step at which loss became non-finite.
class Diverged : public Error {
 public:
  Diverged(const std::string& msg, long step) : Error(msg), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace aec

#endif  // AEC_ERRORS_HPP_
