#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rsfbm::io {

/// Shortest decimal string that reads back to the same double ("nan", "inf", "-inf" otherwise).
std::string format_double(double v);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// $RSFBM_OUTPUT_DIR if set and non-empty, else the current directory.
std::filesystem::path default_output_dir();

struct CsvTable {
  std::vector<std::string> comments;  // written as "# ..." lines
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string to_csv(const CsvTable& table);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace rsfbm::io
