// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <tuple>
#include <vector>

#include "retrace/trace.hpp"

namespace retrace {

enum class Sequentiality : uint8_t { Random, Sequential };

// Record i is Sequential when it continues the previous request of the same
// operation type: op(i) == op(i-1) and lba(i) == lba(i-1) + size_sectors(i-1).
// Record 0 is Random.
std::vector<Sequentiality> sequentiality_flags(const Trace& trace);

struct GroupKey {
  Sequentiality seq = Sequentiality::Random;
  OpType op = OpType::Read;
  uint32_t size_sectors = 0;

  friend bool operator==(const GroupKey&, const GroupKey&) = default;
  friend bool operator<(const GroupKey& a, const GroupKey& b) {
    return std::tuple(a.seq, a.op, a.size_sectors) <
           std::tuple(b.seq, b.op, b.size_sectors);
  }
};

std::string group_key_name(const GroupKey& key);  // e.g. "seq:R:8"

struct RequestGroup {
  GroupKey key;
  std::vector<size_t> member_indices;
  // Inter-arrival samples, one per member that has a successor in the trace.
  std::vector<uint64_t> intt_samples;
};

// Partitions a trace by (sequentiality, op, exact size). Groups come back
// sorted by key; member indices keep trace order. Requires >= 2 records.
std::vector<RequestGroup> classify(const Trace& trace);

}  // namespace retrace
