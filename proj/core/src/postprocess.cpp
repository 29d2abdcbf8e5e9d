// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#include "retrace/postprocess.hpp"

#include "retrace/error.hpp"

namespace retrace {

Trace restore_async(const std::vector<Decomposition>& old_decomp, const Trace& new_trace) {
  if (new_trace.records.empty()) fail(Errc::EmptyTrace, "nothing to postprocess");
  if (old_decomp.size() != new_trace.records.size()) {
    fail(Errc::Misaligned, "decomposition does not align with captured trace");
  }
  const size_t n = new_trace.records.size();

  std::vector<uint64_t> gaps(n > 0 ? n - 1 : 0);
  for (size_t i = 0; i + 1 < n; ++i) {
    uint64_t a = new_trace.records[i].arrival_ns;
    uint64_t b = new_trace.records[i + 1].arrival_ns;
    if (b < a) fail(Errc::Misaligned, "captured trace arrivals are not sorted");
    gaps[i] = b - a;
  }

  Trace out = new_trace;
  for (size_t i = 0; i + 1 < n; ++i) {
    if (!old_decomp[i].is_async) continue;
    if (!out.records[i].response_ns.has_value()) {
      fail(Errc::MissingResponse, "async record has no response time at index " +
                                      std::to_string(i));
    }
    uint64_t resp = *out.records[i].response_ns;
    gaps[i] = gaps[i] > resp ? gaps[i] - resp : 0;
    out.records[i].async_hint = true;
  }

  uint64_t t = out.records[0].arrival_ns;
  for (size_t i = 1; i < n; ++i) {
    t += gaps[i - 1];
    out.records[i].arrival_ns = t;
  }
  return out;
}

}  // namespace retrace
