#pragma once

// CSV and file helpers shared by the harness sources.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace zeus {

/// Doubles are printed with 17 significant digits so values round-trip.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::string_view header);

  CsvWriter& field(double v);
  CsvWriter& field(std::int64_t v);
  CsvWriter& field(std::uint64_t v);
  CsvWriter& field(std::string_view v);
  void end_row();

  const std::string& str() const noexcept { return buf_; }

 private:
  void sep();

  std::string buf_;
  bool row_started_ = false;
};

void ensure_dir(const std::filesystem::path& dir);
/// Writes bytes verbatim; throws io_error. Returns the path.
std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace zeus
