#include "stack3d/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "stack3d/errors.hpp"

namespace stack3d {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + t + "'");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (cfg.entries_.count(key))
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": duplicate key '" + key + "' (first on line " +
                        std::to_string(cfg.lines_.at(key)) + ")");
    cfg.entries_[key] = value;
    cfg.lines_[key] = lineno;
  }
  return cfg;
}

std::string Config::get_str(const std::string& key, const std::string& def) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? def : it->second;
}

double Config::parse_double(const std::string& key, const std::string& raw) const {
  if (raw == "inf" || raw == "infinity")
    return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0') {
    int line = lines_.count(key) ? lines_.at(key) : 0;
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "': not a number: '" + raw + "'");
  }
  return v;
}

double Config::get_double(const std::string& key, double def) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? def : parse_double(key, it->second);
}

int Config::get_int(const std::string& key, int def) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return def;
  double v = parse_double(key, it->second);
  return static_cast<int>(v);
}

bool Config::get_bool(const std::string& key, bool def) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return def;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': not a boolean: '" + it->second + "'");
}

std::string Config::req_str(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

double Config::req_double(const std::string& key) const {
  return parse_double(key, req_str(key));
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  std::vector<std::string> out;
  auto it = entries_.find(key);
  if (it == entries_.end()) return out;
  std::string item;
  std::istringstream ss(it->second);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> Config::group_names(const std::string& prefix) const {
  std::set<std::string> names;
  std::string p = prefix;
  if (!p.empty() && p.back() != '.') p += '.';
  for (const auto& [key, value] : entries_) {
    if (key.rfind(p, 0) != 0) continue;
    size_t dot = key.find('.', p.size());
    if (dot == std::string::npos) continue;
    names.insert(key.substr(p.size(), dot - p.size()));
  }
  return {names.begin(), names.end()};
}

std::uint64_t Config::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0x1f;
    h *= 1099511628211ULL;
  };
  for (const auto& [key, value] : entries_) {
    mix(key);
    mix(value);
  }
  return h;
}

}  // namespace stack3d
