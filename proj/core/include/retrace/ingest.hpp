// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "retrace/trace.hpp"

namespace retrace {

struct IngestOptions {
  // Fraction of non-empty data lines that may fail to parse before the
  // whole file is rejected.
  double malformed_tolerance = 0.01;
};

struct IngestStats {
  size_t data_lines = 0;
  size_t malformed_lines = 0;
  std::string first_error;
};

// Maps "canonical" | "msrc" | "fiu" to a TraceFormat.
TraceFormat format_from_name(std::string_view name);
const char* format_name(TraceFormat format);

// Parses a trace file. Records come back sorted by arrival_ns (stable for
// ties). MSR Cambridge and FIU timestamps are converted to integer ns and
// rebased so the first record arrives at 0, with the absolute origin kept
// in Trace::epoch_ns. Canonical input is taken as-is (epoch 0).
Trace parse_trace(const std::filesystem::path& path, TraceFormat format,
                  const IngestOptions& options = {}, IngestStats* stats = nullptr);

Trace parse_trace_text(std::string_view text, TraceFormat format,
                       const IngestOptions& options = {}, IngestStats* stats = nullptr);

// Canonical CSV: header "arrival_ns,op,lba,size_sectors,response_ns",
// op in {R,W}, ASCII decimal fields, empty response for absent values,
// LF line endings.
extern const char kCanonicalHeader[];

std::string to_canonical_csv(const Trace& trace);
void write_canonical(const Trace& trace, const std::filesystem::path& path);

}  // namespace retrace
