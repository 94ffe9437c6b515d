#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nuhlab {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);
/// Whole file as bytes; throws std::runtime_error if unreadable.
std::string read_file(const std::string& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// In-memory CSV table: a header row, then rows with the same column count.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(const std::vector<std::string>& cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// 8-bit graymap. Missing cells should be encoded by the caller (e.g. 0).
struct Graymap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, row 0 on top
  /// Binary P5 or plain P2 encoding.
  std::string encode(bool binary = true) const;
  static Graymap decode(const std::string& bytes);
};

/// Linear map of values onto 1..255 over [lo, hi]; NaN maps to 0.
Graymap graymap_from_values(int width, int height, const std::vector<double>& values, double lo, double hi);

/// Output directory with an inventory: every file written through it is
/// recorded with its SHA-256, and the manifest is rewritten after each command.
class RunDirectory {
 public:
  RunDirectory(std::string root, std::string config_hash, std::string config_text);

  const std::string& root() const { return root_; }
  /// Writes `bytes` to root/relative (creating parents) and records the checksum.
  void write(const std::string& relative, const std::string& bytes);
  void record_bound(const std::string& key, const std::string& value);
  void record_check(const std::string& name, bool passed, const std::string& detail);
  /// Writes manifest.json (merging entries of an existing manifest with the same config hash).
  void write_manifest() const;

  bool all_checks_passed() const;
  const std::map<std::string, std::string>& files() const { return files_; }

  /// Relative path -> checksum as listed in root/manifest.json (empty if absent).
  static std::map<std::string, std::string> listed_files(const std::string& root);
  /// Files under root not listed in the manifest, and listed files whose checksum differs.
  static std::vector<std::string> audit(const std::string& root);

 private:
  std::string root_;
  std::string config_hash_;
  std::map<std::string, std::string> files_;
  std::map<std::string, std::string> bounds_;
  std::map<std::string, std::pair<bool, std::string>> checks_;
};

extern const char* const kVersion;

}  // namespace nuhlab
