// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#include "retrace/units.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "retrace/error.hpp"

namespace retrace {

uint64_t parse_duration_ns(std::string_view text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  text = text.substr(begin, end - begin);
  if (text.empty()) fail(Errc::BadDuration, "empty duration");

  char buf[64];
  size_t n = std::min(text.size(), sizeof(buf) - 1);
  std::memcpy(buf, text.data(), n);
  buf[n] = '\0';

  char* suffix = nullptr;
  double value = std::strtod(buf, &suffix);
  if (suffix == buf) fail(Errc::BadDuration, "not a duration: " + std::string(text));
  if (value < 0) fail(Errc::BadDuration, "negative duration: " + std::string(text));

  double scale;
  if (std::strcmp(suffix, "") == 0 || std::strcmp(suffix, "ns") == 0) {
    scale = 1;
  } else if (std::strcmp(suffix, "us") == 0) {
    scale = 1e3;
  } else if (std::strcmp(suffix, "ms") == 0) {
    scale = 1e6;
  } else if (std::strcmp(suffix, "s") == 0) {
    scale = 1e9;
  } else {
    fail(Errc::BadDuration, "unknown duration suffix: " + std::string(suffix));
  }
  return static_cast<uint64_t>(std::llround(value * scale));
}

std::string format_duration_ns(uint64_t ns) {
  const char* suffix = "ns";
  uint64_t value = ns;
  if (ns != 0) {
    if (ns % 1'000'000'000 == 0) {
      suffix = "s";
      value = ns / 1'000'000'000;
    } else if (ns % 1'000'000 == 0) {
      suffix = "ms";
      value = ns / 1'000'000;
    } else if (ns % 1'000 == 0) {
      suffix = "us";
      value = ns / 1'000;
    }
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%llu%s", static_cast<unsigned long long>(value), suffix);
  return buf;
}

}  // namespace retrace
