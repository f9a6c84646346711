#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace bdyx_cli {

std::string fmt_double(double v);

/// Row-oriented table that lands as either CSV or a JSON array of
/// objects, depending on the --format switch. Cells are preformatted
/// strings so reruns are byte-identical.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<std::string> cells);

  void write_csv(const std::filesystem::path& path) const;
  void write_json(const std::filesystem::path& path) const;

  /// Dispatch on format ("csv" or "json"); appends the matching
  /// extension to `stem`.
  std::filesystem::path write(const std::filesystem::path& dir,
                              const std::string& stem,
                              const std::string& format) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace bdyx_cli
