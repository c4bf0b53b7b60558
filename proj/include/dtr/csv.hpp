#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace dtr {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

/// A rectangular CSV document with `# key: value` comment lines before the
/// header row. All fields are written unquoted; fields must not contain
/// commas or newlines.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(const std::filesystem::path& path) const;
  static CsvTable read(const std::filesystem::path& path);

  int column(const std::string& name) const;  // -1 when absent
};

}  // namespace dtr
