// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace retrace {

enum class Errc {
  EmptyTrace,
  UnknownFormat,
  TooManyMalformedLines,
  IoError,
  EmptySamples,
  DegeneratePdf,
  DegenerateCdf,
  InsufficientGroups,
  NoRandomGroups,
  ModelMissing,
  Misaligned,
  MissingResponse,
  IndexOutOfRange,
  BackendIoError,
  ClockError,
  ZeroFactor,
  BadDuration,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace retrace
