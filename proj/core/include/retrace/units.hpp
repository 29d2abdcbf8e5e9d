// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace retrace {

// Parses a duration like "100us", "1.5ms", "2s", or "250" (bare ns).
// Accepted suffixes: ns, us, ms, s. Result is nanoseconds.
uint64_t parse_duration_ns(std::string_view text);

// Formats a nanosecond count with the largest suffix that divides it
// exactly: 1500000 -> "1500us", 2000000000 -> "2s", 17 -> "17ns".
std::string format_duration_ns(uint64_t ns);

}  // namespace retrace
