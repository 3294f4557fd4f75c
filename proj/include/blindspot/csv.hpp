#pragma once

// Minimal CSV reading/writing with deterministic float formatting.
//
// Floats are rendered with std::to_chars (shortest round-trip form), so a
// value re-read from CSV compares bit-equal to the value written and repeated
// runs produce byte-identical files.

#include <string>
#include <vector>

namespace blindspot {

// Shortest decimal string that round-trips to the exact double.
std::string format_double(double v);

// Escape a field if it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column position by name; throws IoError if absent.
  int col(const std::string& name) const;
};

// Parses a CSV file with a header row. Lines starting with '#' are skipped.
CsvTable read_csv(const std::string& path);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row);
  void write(const std::string& path) const;
  std::string to_string() const;
  std::size_t row_count() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Creates every missing directory on `path` (like mkdir -p).
void ensure_dir(const std::string& path);

// Directory part of a path ("" if none).
std::string dir_name(const std::string& path);

// Writes text to a file atomically enough for our purposes (truncate+write).
void write_text_file(const std::string& path, const std::string& text);

// Reads an entire file into a string; throws IoError if unreadable.
std::string read_text_file(const std::string& path);

}  // namespace blindspot
