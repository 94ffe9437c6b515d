#include "nuhlab/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace nuhlab {

namespace fs = std::filesystem;

const char* const kVersion = "0.1.0";

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("csv: row width does not match header");
  rows_.push_back(cells);
  return *this;
}

std::string CsvTable::str() const {
  auto line = [](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      if (cells[i].find_first_of(",\"\n") != std::string::npos) {
        s += '"';
        for (char c : cells[i]) s += c == '"' ? std::string("\"\"") : std::string(1, c);
        s += '"';
      } else {
        s += cells[i];
      }
    }
    return s + "\n";
  };
  std::string out = line(header_);
  for (const auto& r : rows_) out += line(r);
  return out;
}

std::string Graymap::encode(bool binary) const {
  if (pixels.size() != static_cast<std::size_t>(width) * height) throw std::invalid_argument("pgm: size mismatch");
  std::string out = (binary ? "P5\n" : "P2\n") + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  if (binary) {
    out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  } else {
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        if (c) out += ' ';
        out += std::to_string(pixels[static_cast<std::size_t>(r) * width + c]);
      }
      out += '\n';
    }
  }
  return out;
}

Graymap Graymap::decode(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  int maxval = 0;
  Graymap g;
  in >> magic >> g.width >> g.height >> maxval;
  if ((magic != "P5" && magic != "P2") || g.width <= 0 || g.height <= 0 || maxval != 255)
    throw std::invalid_argument("pgm: unsupported header");
  g.pixels.resize(static_cast<std::size_t>(g.width) * g.height);
  if (magic == "P5") {
    in.get();
    in.read(reinterpret_cast<char*>(g.pixels.data()), static_cast<std::streamsize>(g.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(g.pixels.size())) throw std::invalid_argument("pgm: truncated");
  } else {
    for (auto& p : g.pixels) {
      int v;
      if (!(in >> v)) throw std::invalid_argument("pgm: truncated");
      p = static_cast<std::uint8_t>(v);
    }
  }
  return g;
}

Graymap graymap_from_values(int width, int height, const std::vector<double>& values, double lo, double hi) {
  Graymap g{width, height, std::vector<std::uint8_t>(values.size(), 0)};
  for (std::size_t i = 0; i < values.size(); ++i) {
    double v = values[i];
    if (std::isnan(v)) continue;
    double t = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.5;
    g.pixels[i] = static_cast<std::uint8_t>(1 + std::lround(254.0 * t));
  }
  return g;
}

RunDirectory::RunDirectory(std::string root, std::string config_hash, std::string config_text)
    : root_(std::move(root)), config_hash_(std::move(config_hash)) {
  fs::create_directories(root_);
  fs::path manifest = fs::path(root_) / "manifest.json";
  if (fs::exists(manifest)) {
    auto j = nlohmann::json::parse(read_file(manifest.string()));
    if (j.value("config_hash", "") != config_hash_)
      throw std::runtime_error("output directory " + root_ + " holds a run with a different configuration");
    for (auto& [k, v] : j["files"].items()) files_[k] = v.get<std::string>();
    for (auto& [k, v] : j["bounds"].items()) bounds_[k] = v.get<std::string>();
    for (auto& [k, v] : j["checks"].items()) checks_[k] = {v["passed"].get<bool>(), v["detail"].get<std::string>()};
  }
  write("config.txt", config_text);
}

void RunDirectory::write(const std::string& relative, const std::string& bytes) {
  fs::path p = fs::path(root_) / relative;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + p.string());
  files_[relative] = sha256_hex(bytes);
}

void RunDirectory::record_bound(const std::string& key, const std::string& value) { bounds_[key] = value; }

void RunDirectory::record_check(const std::string& name, bool passed, const std::string& detail) {
  checks_[name] = {passed, detail};
}

bool RunDirectory::all_checks_passed() const {
  return std::all_of(checks_.begin(), checks_.end(), [](const auto& c) { return c.second.first; });
}

void RunDirectory::write_manifest() const {
  nlohmann::json j;
  j["version"] = kVersion;
  j["config_hash"] = config_hash_;
  j["files"] = nlohmann::json::object();
  for (const auto& [k, v] : files_) j["files"][k] = v;
  j["bounds"] = nlohmann::json::object();
  for (const auto& [k, v] : bounds_) j["bounds"][k] = v;
  j["checks"] = nlohmann::json::object();
  for (const auto& [k, v] : checks_) j["checks"][k] = {{"passed", v.first}, {"detail", v.second}};
  std::ofstream out(fs::path(root_) / "manifest.json", std::ios::binary | std::ios::trunc);
  out << j.dump(2) << "\n";
}

std::map<std::string, std::string> RunDirectory::listed_files(const std::string& root) {
  std::map<std::string, std::string> listed;
  fs::path manifest = fs::path(root) / "manifest.json";
  if (!fs::exists(manifest)) return listed;
  auto j = nlohmann::json::parse(read_file(manifest.string()));
  for (auto& [k, v] : j["files"].items()) listed[k] = v.get<std::string>();
  return listed;
}

std::vector<std::string> RunDirectory::audit(const std::string& root) {
  std::vector<std::string> problems;
  fs::path manifest = fs::path(root) / "manifest.json";
  if (!fs::exists(manifest)) return {"manifest.json missing"};
  auto j = nlohmann::json::parse(read_file(manifest.string()));
  std::map<std::string, std::string> listed;
  for (auto& [k, v] : j["files"].items()) listed[k] = v.get<std::string>();
  std::vector<std::string> present;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::string rel = fs::relative(e.path(), root).generic_string();
    if (rel == "manifest.json") continue;
    present.push_back(rel);
  }
  std::sort(present.begin(), present.end());
  for (const auto& rel : present) {
    auto it = listed.find(rel);
    if (it == listed.end())
      problems.push_back("orphan: " + rel);
    else if (sha256_file((fs::path(root) / rel).string()) != it->second)
      problems.push_back("checksum mismatch: " + rel);
  }
  for (const auto& [rel, sum] : listed)
    if (!std::binary_search(present.begin(), present.end(), rel)) problems.push_back("missing: " + rel);
  return problems;
}

}  // namespace nuhlab
