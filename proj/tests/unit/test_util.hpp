#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "zeus/error.hpp"

// Expects `stmt` to throw zeus::Error with the given code.
#define EXPECT_ZEUS_ERROR(stmt, error_code)                                        \
  do {                                                                             \
    try {                                                                          \
      stmt;                                                                        \
      ADD_FAILURE() << "expected " << zeus::to_string(error_code) << ", got none"; \
    } catch (const zeus::Error& e) {                                               \
      EXPECT_EQ(e.code(), error_code) << e.what();                                 \
    }                                                                              \
  } while (0)

namespace zeus::testing {

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() / "zeus_tests" /
             (std::string(info->test_suite_name()) + "." + info->name()) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace zeus::testing
