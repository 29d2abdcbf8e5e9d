// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "retrace/trace.hpp"

namespace retrace {

// Restores asynchronous submission timing in a captured trace. For every
// index the old trace flagged async, the gap to the next record shrinks by
// that record's new response time (clamped at 0) and the timeline is
// re-accumulated from the adjusted gaps. Async flags come from the old
// trace's decomposition only; the new trace is never re-tested.
Trace restore_async(const std::vector<Decomposition>& old_decomp, const Trace& new_trace);

}  // namespace retrace
