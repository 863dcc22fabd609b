#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace attnlab {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Refusal to clobber an existing output without the overwrite flag.
struct ExistsError : IoError {
  using IoError::IoError;
};

// 17 significant digits, enough to round-trip a double; non-finite values
// become "inf"/"-inf"/"nan".
std::string format_real(double v);

// Writes through a temp file in the same directory and renames into place,
// creating parent directories as needed.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(int v);
  CsvWriter& cell(long v);
  CsvWriter& cell(double v);
  void end_row();
  const std::string& str() const { return out_; }

 private:
  std::string out_;
  size_t width_;
  size_t in_row_ = 0;
};

// One "name hash" line per file, sorted by name; name is the path relative
// to base_dir.
std::string manifest_for(const std::vector<std::string>& paths, const std::string& base_dir);

}  // namespace attnlab
