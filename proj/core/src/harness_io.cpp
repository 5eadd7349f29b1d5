#include "harness_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "zeus/error.hpp"

namespace zeus {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::string_view header) : buf_(header) { buf_ += '\n'; }

void CsvWriter::sep() {
  if (row_started_) buf_ += ',';
  row_started_ = true;
}

CsvWriter& CsvWriter::field(double v) {
  sep();
  buf_ += format_double(v);
  return *this;
}

CsvWriter& CsvWriter::field(std::int64_t v) {
  sep();
  buf_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::field(std::uint64_t v) {
  sep();
  buf_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::field(std::string_view v) {
  sep();
  // Quote only when needed; none of our own labels contain these characters.
  if (v.find_first_of(",\"\n") == std::string_view::npos) {
    buf_ += v;
    return *this;
  }
  buf_ += '"';
  for (char c : v) {
    if (c == '"') buf_ += '"';
    buf_ += c;
  }
  buf_ += '"';
  return *this;
}

void CsvWriter::end_row() {
  buf_ += '\n';
  row_started_ = false;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
}

std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
  return path;
}

}  // namespace zeus
