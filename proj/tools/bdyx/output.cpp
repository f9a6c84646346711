#include "output.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bdyx_cli {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) {
    throw std::logic_error("table row width mismatch");
  }
  rows_.push_back(std::move(cells));
}

void Table::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string());
  }
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    out << columns_[c] << (c + 1 < columns_.size() ? "," : "\n");
  }
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c] << (c + 1 < row.size() ? "," : "\n");
    }
  }
}

void Table::write_json(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string());
  }
  // cells are already formatted; numbers are emitted unquoted when they
  // parse as such
  const auto is_numeric = [](const std::string& s) {
    if (s.empty()) return false;
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
  };
  out << "[\n";
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    out << "  {";
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      out << "\"" << columns_[c] << "\": ";
      if (is_numeric(rows_[r][c])) {
        out << rows_[r][c];
      } else {
        out << "\"" << rows_[r][c] << "\"";
      }
      if (c + 1 < columns_.size()) out << ", ";
    }
    out << "}" << (r + 1 < rows_.size() ? "," : "") << "\n";
  }
  out << "]\n";
}

std::filesystem::path Table::write(const std::filesystem::path& dir,
                                   const std::string& stem,
                                   const std::string& format) const {
  const auto path = dir / (stem + (format == "json" ? ".json" : ".csv"));
  if (format == "json") {
    write_json(path);
  } else {
    write_csv(path);
  }
  return path;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string());
  }
  out << content;
}

}  // namespace bdyx_cli
