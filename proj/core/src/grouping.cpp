// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#include "retrace/grouping.hpp"

#include <map>

#include "retrace/error.hpp"

namespace retrace {

std::vector<Sequentiality> sequentiality_flags(const Trace& trace) {
  std::vector<Sequentiality> flags(trace.records.size(), Sequentiality::Random);
  for (size_t i = 1; i < trace.records.size(); ++i) {
    const IoRecord& prev = trace.records[i - 1];
    const IoRecord& cur = trace.records[i];
    if (cur.op == prev.op && cur.lba == prev.lba + prev.size_sectors)
      flags[i] = Sequentiality::Sequential;
  }
  return flags;
}

std::string group_key_name(const GroupKey& key) {
  std::string name = key.seq == Sequentiality::Sequential ? "seq" : "rand";
  name.push_back(':');
  name.push_back(op_to_char(key.op));
  name.push_back(':');
  name += std::to_string(key.size_sectors);
  return name;
}

std::vector<RequestGroup> classify(const Trace& trace) {
  if (trace.records.size() < 2)
    fail(Errc::EmptyTrace, "need at least 2 records to classify");

  std::vector<Sequentiality> flags = sequentiality_flags(trace);
  std::map<GroupKey, RequestGroup> groups;
  for (size_t i = 0; i < trace.records.size(); ++i) {
    const IoRecord& rec = trace.records[i];
    GroupKey key{flags[i], rec.op, rec.size_sectors};
    RequestGroup& group = groups[key];
    group.key = key;
    group.member_indices.push_back(i);
    if (i + 1 < trace.records.size()) {
      uint64_t a = rec.arrival_ns;
      uint64_t b = trace.records[i + 1].arrival_ns;
      if (b < a) fail(Errc::Misaligned, "arrival timestamps not sorted");
      group.intt_samples.push_back(b - a);
    }
  }

  std::vector<RequestGroup> out;
  out.reserve(groups.size());
  for (auto& [key, group] : groups) out.push_back(std::move(group));
  return out;
}

}  // namespace retrace
