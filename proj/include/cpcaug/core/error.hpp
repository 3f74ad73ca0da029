// cpcaug/core/error.hpp

// Copyright 2026  The cpcaug Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpcaug {

enum class ErrorKind {
  kInvalidArgument,  // precondition violated by the caller
  kNotFound,         // missing file or directory
  kIo,               // read/write failure on an existing path
  kUnsupported,      // valid container, unsupported encoding
  kTruncated,        // container shorter than its header claims
  kFormat,           // malformed text/binary content
  kRange,            // index or window outside the valid range
  kEmpty,            // nothing to operate on
  kNumeric,          // NaN/Inf or divergence
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kNotFound: return "not-found";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kUnsupported: return "unsupported";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kEmpty: return "empty";
    case ErrorKind::kNumeric: return "numeric";
  }
  return "unknown";
}

/// Every failure raised by the library. The kind lets callers (and the CLI's
/// exit-code mapping) tell error classes apart without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, std::string_view what,
                    ErrorKind kind = ErrorKind::kInvalidArgument) {
  if (!condition) throw Error(kind, std::string(what));
}

}  // namespace cpcaug
