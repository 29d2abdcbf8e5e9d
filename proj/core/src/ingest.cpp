// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#include "retrace/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "retrace/error.hpp"

namespace retrace {

const char kCanonicalHeader[] = "arrival_ns,op,lba,size_sectors,response_ns";

namespace {

constexpr uint64_t kSectorBytes = 512;
constexpr uint64_t kTickNs = 100;  // MSR Cambridge timestamps are 100ns ticks

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool parse_u64(std::string_view s, uint64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Splits on a single-character delimiter, keeping empty fields.
void split_char(std::string_view line, char delim, std::vector<std::string_view>& out) {
  out.clear();
  size_t start = 0;
  while (true) {
    size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void split_ws(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
}

bool parse_op(std::string_view s, OpType& op) {
  if (s.empty()) return false;
  if (s == "R" || s == "r") { op = OpType::Read; return true; }
  if (s == "W" || s == "w") { op = OpType::Write; return true; }
  // MSR Cambridge spells the operation out.
  if (s.size() >= 4) {
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    std::string lower;
    lower.reserve(s.size());
    for (char ch : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (lower == "read") { op = OpType::Read; return true; }
    if (lower == "write") { op = OpType::Write; return true; }
    (void)c;
  }
  return false;
}

// Decimal seconds ("123.000042653") to integer ns without a float round trip.
bool parse_seconds_ns(std::string_view s, uint64_t& out) {
  size_t dot = s.find('.');
  std::string_view whole = dot == std::string_view::npos ? s : s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  uint64_t sec = 0;
  if (!parse_u64(whole, sec)) return false;
  uint64_t frac_ns = 0;
  uint64_t scale = 100'000'000;  // first fractional digit is 100ms
  for (char c : frac) {
    if (c < '0' || c > '9') return false;
    if (scale > 0) {
      frac_ns += static_cast<uint64_t>(c - '0') * scale;
      scale /= 10;
    }
  }
  out = sec * 1'000'000'000ull + frac_ns;
  return true;
}

struct RawRecord {
  uint64_t arrival_abs_ns;
  IoRecord rec;
};

bool parse_canonical_line(std::string_view line, std::vector<std::string_view>& fields,
                          RawRecord& out) {
  split_char(line, ',', fields);
  if (fields.size() != 5) return false;
  uint64_t arrival = 0, lba = 0, size = 0;
  OpType op;
  if (!parse_u64(fields[0], arrival)) return false;
  if (fields[1].size() != 1 || !parse_op(fields[1], op)) return false;
  if (!parse_u64(fields[2], lba)) return false;
  if (!parse_u64(fields[3], size) || size == 0 || size > UINT32_MAX) return false;
  std::optional<uint64_t> response;
  if (!fields[4].empty()) {
    uint64_t r = 0;
    if (!parse_u64(fields[4], r)) return false;
    response = r;
  }
  out.arrival_abs_ns = arrival;
  out.rec = IoRecord{arrival, op, lba, static_cast<uint32_t>(size), response, false};
  return true;
}

// Timestamp,Hostname,DiskNumber,Type,Offset,Size,ResponseTime
// Timestamp and ResponseTime are 100ns ticks; Offset and Size are bytes.
bool parse_msrc_line(std::string_view line, std::vector<std::string_view>& fields,
                     RawRecord& out) {
  split_char(line, ',', fields);
  if (fields.size() != 7) return false;
  uint64_t ts = 0, disk = 0, offset = 0, size = 0, response = 0;
  OpType op;
  if (!parse_u64(fields[0], ts)) return false;
  if (!parse_u64(fields[2], disk)) return false;
  if (!parse_op(fields[3], op)) return false;
  if (!parse_u64(fields[4], offset)) return false;
  if (offset % kSectorBytes != 0) return false;
  if (!parse_u64(fields[5], size)) return false;
  if (!parse_u64(fields[6], response)) return false;
  uint64_t sectors = size / kSectorBytes;
  if (sectors == 0 || sectors > UINT32_MAX) return false;
  out.arrival_abs_ns = ts * kTickNs;
  out.rec = IoRecord{0, op, offset / kSectorBytes, static_cast<uint32_t>(sectors),
                     response * kTickNs, false};
  return true;
}

// ts pid process lba size op major minor [md5]; ts is fractional seconds,
// lba and size are already 512-byte blocks.
bool parse_fiu_line(std::string_view line, std::vector<std::string_view>& fields,
                    RawRecord& out) {
  split_ws(line, fields);
  if (fields.size() != 8 && fields.size() != 9) return false;
  uint64_t ts_ns = 0, lba = 0, size = 0;
  OpType op;
  if (!parse_seconds_ns(fields[0], ts_ns)) return false;
  if (!parse_u64(fields[3], lba)) return false;
  if (!parse_u64(fields[4], size) || size == 0 || size > UINT32_MAX) return false;
  if (fields[5].size() != 1 || !parse_op(fields[5], op)) return false;
  out.arrival_abs_ns = ts_ns;
  out.rec = IoRecord{0, op, lba, static_cast<uint32_t>(size), std::nullopt, false};
  return true;
}

}  // namespace

TraceFormat format_from_name(std::string_view name) {
  if (name == "canonical") return TraceFormat::CanonicalCsv;
  if (name == "msrc") return TraceFormat::MsrCambridge;
  if (name == "fiu") return TraceFormat::FiuSrcmap;
  fail(Errc::UnknownFormat, "unknown trace format '" + std::string(name) +
                                "' (expected canonical, msrc, or fiu)");
}

const char* format_name(TraceFormat format) {
  switch (format) {
    case TraceFormat::CanonicalCsv: return "canonical";
    case TraceFormat::MsrCambridge: return "msrc";
    case TraceFormat::FiuSrcmap: return "fiu";
  }
  return "unknown";
}

Trace parse_trace_text(std::string_view text, TraceFormat format,
                       const IngestOptions& options, IngestStats* stats) {
  IngestStats local;
  std::vector<RawRecord> raw;
  std::vector<std::string_view> fields;

  size_t pos = 0;
  bool saw_header = false;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = nl == std::string_view::npos
                                ? text.substr(pos)
                                : text.substr(pos, nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    line = strip_cr(line);
    if (line.empty()) continue;

    if (format == TraceFormat::CanonicalCsv && !saw_header) {
      if (line != kCanonicalHeader)
        fail(Errc::UnknownFormat, "canonical CSV must start with header '" +
                                      std::string(kCanonicalHeader) + "'");
      saw_header = true;
      continue;
    }

    ++local.data_lines;
    RawRecord r;
    bool ok = false;
    switch (format) {
      case TraceFormat::CanonicalCsv: ok = parse_canonical_line(line, fields, r); break;
      case TraceFormat::MsrCambridge: ok = parse_msrc_line(line, fields, r); break;
      case TraceFormat::FiuSrcmap: ok = parse_fiu_line(line, fields, r); break;
    }
    if (!ok) {
      ++local.malformed_lines;
      if (local.first_error.empty())
        local.first_error = "line " + std::to_string(local.data_lines) + ": '" +
                            std::string(line.substr(0, 80)) + "'";
      continue;
    }
    raw.push_back(std::move(r));
  }

  if (format == TraceFormat::CanonicalCsv && !saw_header)
    fail(Errc::UnknownFormat, "canonical CSV missing header");

  if (local.data_lines > 0 &&
      static_cast<double>(local.malformed_lines) >
          options.malformed_tolerance * static_cast<double>(local.data_lines)) {
    if (stats) *stats = local;
    fail(Errc::TooManyMalformedLines,
         std::to_string(local.malformed_lines) + " of " +
             std::to_string(local.data_lines) + " lines malformed (first: " +
             local.first_error + ")");
  }

  if (raw.empty()) {
    if (stats) *stats = local;
    fail(Errc::EmptyTrace, "no records parsed");
  }

  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawRecord& a, const RawRecord& b) {
                     return a.arrival_abs_ns < b.arrival_abs_ns;
                   });

  Trace trace;
  trace.source_format = format;
  trace.records.reserve(raw.size());
  if (format == TraceFormat::CanonicalCsv) {
    trace.epoch_ns = 0;
    for (auto& r : raw) trace.records.push_back(std::move(r.rec));
  } else {
    trace.epoch_ns = raw.front().arrival_abs_ns;
    for (auto& r : raw) {
      r.rec.arrival_ns = r.arrival_abs_ns - trace.epoch_ns;
      trace.records.push_back(std::move(r.rec));
    }
  }
  if (stats) *stats = local;
  return trace;
}

Trace parse_trace(const std::filesystem::path& path, TraceFormat format,
                  const IngestOptions& options, IngestStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(Errc::IoError, "read failed on " + path.string());
  return parse_trace_text(buf.str(), format, options, stats);
}

std::string to_canonical_csv(const Trace& trace) {
  std::string out(kCanonicalHeader);
  out.push_back('\n');
  char buf[32];
  auto append_u64 = [&out, &buf](uint64_t v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.append(buf, ptr);
  };
  for (const IoRecord& rec : trace.records) {
    append_u64(rec.arrival_ns);
    out.push_back(',');
    out.push_back(op_to_char(rec.op));
    out.push_back(',');
    append_u64(rec.lba);
    out.push_back(',');
    append_u64(rec.size_sectors);
    out.push_back(',');
    if (rec.response_ns) append_u64(*rec.response_ns);
    out.push_back('\n');
  }
  return out;
}

void write_canonical(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot open " + path.string() + " for writing");
  std::string text = to_canonical_csv(trace);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(Errc::IoError, "write failed on " + path.string());
}

}  // namespace retrace
