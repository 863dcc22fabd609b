#include "attnlab/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace attnlab {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + target.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on " + path);
  return ss.str();
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  if (header.empty()) throw IoError("csv header must be non-empty");
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out_ += ',';
    out_ += header[i];
  }
  out_ += '\n';
}

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (in_row_ >= width_) throw IoError("csv row wider than header");
  if (in_row_) out_ += ',';
  out_ += v;
  ++in_row_;
  return *this;
}

CsvWriter& CsvWriter::cell(int v) { return cell(std::to_string(v)); }
CsvWriter& CsvWriter::cell(long v) { return cell(std::to_string(v)); }
CsvWriter& CsvWriter::cell(double v) { return cell(format_real(v)); }

void CsvWriter::end_row() {
  if (in_row_ != width_) throw IoError("csv row narrower than header");
  out_ += '\n';
  in_row_ = 0;
}

std::string manifest_for(const std::vector<std::string>& paths, const std::string& base_dir) {
  namespace fs = std::filesystem;
  std::vector<std::pair<std::string, std::string>> entries;
  entries.reserve(paths.size());
  for (const auto& p : paths) {
    std::string rel = fs::relative(fs::path(p), fs::path(base_dir)).generic_string();
    entries.emplace_back(rel, fnv1a64_hex(read_file(p)));
  }
  std::sort(entries.begin(), entries.end());
  std::string out;
  for (const auto& [name, hash] : entries) {
    out += name;
    out += ' ';
    out += hash;
    out += '\n';
  }
  return out;
}

}  // namespace attnlab
