#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace zeus {

// Binary layout, little-endian throughout:
//   char[4] magic "ZTRC" | u32 version | u32 T | u64 d | u32 dtype
//   T records of: u32 step | f64 s | f32[d] psi
// Step indices strictly decrease in file order.
inline constexpr char kTraceMagic[4] = {'Z', 'T', 'R', 'C'};
inline constexpr std::uint32_t kTraceVersion = 1;
inline constexpr std::uint32_t kTraceDtypeF32 = 1;

struct TraceRecord {
  std::uint32_t step = 0;
  double s = 0.0;
  std::vector<float> psi;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
  std::uint32_t steps = 0;
  std::uint64_t dim = 0;
  std::vector<TraceRecord> records;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Checks record count, dimension and strictly decreasing steps.
/// Throws trace_format_error.
void validate_trace(const Trace& trace);

std::vector<unsigned char> encode_trace(const Trace& trace);
Trace decode_trace(const std::vector<unsigned char>& bytes);

void write_trace(const std::string& path, const Trace& trace);
Trace read_trace(const std::string& path);

/// Reads only the header fields (T, d); used to validate configs before running.
Trace read_trace_header(const std::string& path);

}  // namespace zeus
