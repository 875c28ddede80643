#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace stack3d {

/// Flat `key = value` configuration file. `#` starts a comment, blank
/// lines are ignored, duplicate keys are an error. All study inputs come
/// from these files (no environment variables) so runs stay reproducible.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string get_str(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  bool get_bool(const std::string& key, bool def) const;

  // required variants; throw ConfigError naming the key
  std::string req_str(const std::string& key) const;
  double req_double(const std::string& key) const;

  // comma-separated list value
  std::vector<std::string> get_list(const std::string& key) const;

  // distinct second-level names under `prefix.` (e.g. node names)
  std::vector<std::string> group_names(const std::string& prefix) const;

  // FNV-1a over the sorted entries; recorded in artifact headers
  std::uint64_t fingerprint() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  std::map<std::string, int> lines_;

  double parse_double(const std::string& key, const std::string& raw) const;
};

}  // namespace stack3d
