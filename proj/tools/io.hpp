#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"

namespace ebl::cli {

namespace fs = std::filesystem;

inline std::uint64_t fnv1a(const std::string& data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Writes through a temporary file in the same directory, then renames.
inline void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// CSV with a provenance line, a column header and %.17g rows.
class CsvTable {
 public:
  CsvTable(std::vector<std::string> columns, const json& config) : columns_(std::move(columns)) {
    head_ = "# ebl " + std::string(version) + " config=" + config.dump() + "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) head_ += (i ? "," : "") + columns_[i];
    head_ += "\n";
  }
  void row(const std::vector<double>& values) {
    if (values.size() != columns_.size()) throw Error("CSV row width does not match header");
    for (std::size_t i = 0; i < values.size(); ++i) body_ += (i ? "," : "") + format_number(values[i]);
    body_ += "\n";
  }
  std::string str() const { return head_ + body_; }

 private:
  std::vector<std::string> columns_;
  std::string head_, body_;
};

/// JSON document with the resolved config and version embedded.
inline std::string json_document(json payload, const json& config) {
  json doc;
  doc["ebl_version"] = version;
  doc["config"] = config;
  for (auto it = payload.begin(); it != payload.end(); ++it) doc[it.key()] = it.value();
  return doc.dump(2) + "\n";
}

/// Output directory with a content-addressed manifest: a run whose key and
/// files are unchanged is skipped.
class OutputSet {
 public:
  OutputSet(fs::path dir, std::string command, const json& config, bool use_cache)
      : dir_(std::move(dir)), command_(std::move(command)), use_cache_(use_cache) {
    key_ = hex64(fnv1a(command_ + "\n" + std::string(version) + "\n" + config.dump()));
  }

  const std::string& key() const { return key_; }
  fs::path path(const std::string& name) const { return dir_ / name; }

  /// Exit code of the cached run when key and file hashes still match.
  std::optional<int> cached() const {
    if (!use_cache_) return std::nullopt;
    const fs::path manifest = manifest_path();
    if (!fs::exists(manifest)) return std::nullopt;
    try {
      const json m = json::parse(read_file(manifest));
      if (m.value("key", "") != key_) return std::nullopt;
      for (const auto& f : m.at("files")) {
        const fs::path p = dir_ / f.at("name").get<std::string>();
        if (!fs::exists(p)) return std::nullopt;
        if (hex64(fnv1a(read_file(p))) != f.at("hash").get<std::string>()) return std::nullopt;
      }
      return m.at("exit_code").get<int>();
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  void write(const std::string& name, const std::string& content) {
    write_atomic(dir_ / name, content);
    files_.push_back({name, hex64(fnv1a(content))});
  }

  void commit(int exit_code) const {
    json m;
    m["command"] = command_;
    m["key"] = key_;
    m["exit_code"] = exit_code;
    m["files"] = json::array();
    for (const auto& [n, h] : files_) m["files"].push_back({{"name", n}, {"hash", h}});
    write_atomic(manifest_path(), m.dump(2) + "\n");
  }

 private:
  fs::path manifest_path() const { return dir_ / ".ebl-cache" / (command_ + ".json"); }

  fs::path dir_;
  std::string command_;
  bool use_cache_;
  std::string key_;
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace ebl::cli
