#include "zeus/trace.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "zeus/error.hpp"

namespace zeus {

namespace {

constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 8 + 4;

template <typename U>
void put_le(std::vector<unsigned char>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<unsigned char>((value >> (8 * i)) & 0xFFu));
  }
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  template <typename U>
  U get_le(const char* what) {
    if (bytes_.size() - pos_ < sizeof(U)) {
      throw Error(ErrorCode::trace_format_error, std::string("truncated while reading ") + what);
    }
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return value;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

Trace decode_header(Reader& in) {
  char magic[4];
  for (char& c : magic) c = static_cast<char>(in.get_le<std::uint8_t>("magic"));
  if (std::memcmp(magic, kTraceMagic, 4) != 0) {
    throw Error(ErrorCode::trace_format_error, "bad magic");
  }
  const auto version = in.get_le<std::uint32_t>("version");
  if (version != kTraceVersion) {
    throw Error(ErrorCode::trace_format_error, "unsupported version " + std::to_string(version));
  }
  Trace trace;
  trace.steps = in.get_le<std::uint32_t>("T");
  trace.dim = in.get_le<std::uint64_t>("d");
  const auto dtype = in.get_le<std::uint32_t>("dtype");
  if (dtype != kTraceDtypeF32) {
    throw Error(ErrorCode::trace_format_error, "unsupported dtype tag " + std::to_string(dtype));
  }
  return trace;
}

std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void validate_trace(const Trace& trace) {
  if (trace.records.size() != trace.steps) {
    throw Error(ErrorCode::trace_format_error,
                "header says " + std::to_string(trace.steps) + " records, found " +
                    std::to_string(trace.records.size()));
  }
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& rec = trace.records[i];
    if (rec.psi.size() != trace.dim) {
      throw Error(ErrorCode::trace_format_error, "record " + std::to_string(i) + " has dimension " +
                                                     std::to_string(rec.psi.size()));
    }
    if (i > 0 && !(rec.step < trace.records[i - 1].step)) {
      throw Error(ErrorCode::trace_format_error, "step indices must strictly decrease");
    }
  }
}

std::vector<unsigned char> encode_trace(const Trace& trace) {
  validate_trace(trace);
  std::vector<unsigned char> out;
  out.reserve(kHeaderBytes + trace.records.size() * (12 + 4 * trace.dim));
  out.insert(out.end(), std::begin(kTraceMagic), std::end(kTraceMagic));
  put_le(out, kTraceVersion);
  put_le(out, trace.steps);
  put_le(out, trace.dim);
  put_le(out, kTraceDtypeF32);
  for (const auto& rec : trace.records) {
    put_le(out, rec.step);
    put_le(out, std::bit_cast<std::uint64_t>(rec.s));
    for (float v : rec.psi) put_le(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Trace decode_trace(const std::vector<unsigned char>& bytes) {
  Reader in(bytes);
  Trace trace = decode_header(in);
  const std::uint64_t record_bytes = 12 + 4 * trace.dim;
  if (trace.dim == 0 || record_bytes / 4 < trace.dim ||
      in.remaining() != record_bytes * trace.steps) {
    throw Error(ErrorCode::trace_format_error,
                "payload size " + std::to_string(in.remaining()) + " does not match header");
  }
  trace.records.resize(trace.steps);
  for (auto& rec : trace.records) {
    rec.step = in.get_le<std::uint32_t>("step");
    rec.s = std::bit_cast<double>(in.get_le<std::uint64_t>("s"));
    rec.psi.resize(trace.dim);
    for (float& v : rec.psi) v = std::bit_cast<float>(in.get_le<std::uint32_t>("psi"));
  }
  validate_trace(trace);
  return trace;
}

void write_trace(const std::string& path, const Trace& trace) {
  const auto bytes = encode_trace(trace);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, "short write to " + path);
}

Trace read_trace(const std::string& path) { return decode_trace(slurp(path)); }

Trace read_trace_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  std::vector<unsigned char> head(kHeaderBytes);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  Reader reader(head);
  return decode_header(reader);
}

}  // namespace zeus
