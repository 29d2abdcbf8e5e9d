// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#include "retrace/trace.hpp"

#include "retrace/error.hpp"

namespace retrace {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::EmptyTrace: return "EmptyTrace";
    case Errc::UnknownFormat: return "UnknownFormat";
    case Errc::TooManyMalformedLines: return "TooManyMalformedLines";
    case Errc::IoError: return "IoError";
    case Errc::EmptySamples: return "EmptySamples";
    case Errc::DegeneratePdf: return "DegeneratePdf";
    case Errc::DegenerateCdf: return "DegenerateCdf";
    case Errc::InsufficientGroups: return "InsufficientGroups";
    case Errc::NoRandomGroups: return "NoRandomGroups";
    case Errc::ModelMissing: return "ModelMissing";
    case Errc::Misaligned: return "Misaligned";
    case Errc::MissingResponse: return "MissingResponse";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::BackendIoError: return "BackendIoError";
    case Errc::ClockError: return "ClockError";
    case Errc::ZeroFactor: return "ZeroFactor";
    case Errc::BadDuration: return "BadDuration";
  }
  return "UnknownError";
}

char op_to_char(OpType op) { return op == OpType::Read ? 'R' : 'W'; }

std::vector<uint64_t> inter_arrival_times(const Trace& trace) {
  if (trace.records.size() < 2)
    fail(Errc::EmptyTrace, "need at least 2 records for inter-arrival times");
  std::vector<uint64_t> gaps;
  gaps.reserve(trace.records.size() - 1);
  for (size_t i = 0; i + 1 < trace.records.size(); ++i) {
    uint64_t a = trace.records[i].arrival_ns;
    uint64_t b = trace.records[i + 1].arrival_ns;
    if (b < a) fail(Errc::Misaligned, "arrival timestamps not sorted");
    gaps.push_back(b - a);
  }
  return gaps;
}

}  // namespace retrace
