#include "blindspot/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "blindspot/error.hpp"

namespace blindspot {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

KVConfig KVConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

KVConfig KVConfig::parse_text(const std::string& text, const std::string& origin) {
  KVConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

std::string KVConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

std::string KVConfig::get_string(const std::string& key, const std::string& def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

long long KVConfig::get_int(const std::string& key) const {
  const std::string raw = get_string(key);
  const char* s = raw.c_str();
  char* end = nullptr;
  const long long v = std::strtoll(s, &end, 10);
  if (end == s || *end != '\0')
    throw ConfigError("key '" + key + "': expected integer, got '" + raw + "'");
  return v;
}

long long KVConfig::get_int(const std::string& key, long long def) const {
  return has(key) ? get_int(key) : def;
}

double KVConfig::get_double(const std::string& key) const {
  const std::string raw = get_string(key);
  const char* s = raw.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    throw ConfigError("key '" + key + "': expected number, got '" + raw + "'");
  return v;
}

double KVConfig::get_double(const std::string& key, double def) const {
  return has(key) ? get_double(key) : def;
}

bool KVConfig::get_bool(const std::string& key) const {
  const std::string raw = get_string(key);
  if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
  if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
  throw ConfigError("key '" + key + "': expected boolean, got '" + raw + "'");
}

bool KVConfig::get_bool(const std::string& key, bool def) const {
  return has(key) ? get_bool(key) : def;
}

std::vector<long long> KVConfig::get_int_list(const std::string& key) const {
  const std::string raw = get_string(key);
  std::vector<long long> out;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ConfigError("key '" + key + "': empty list element in '" + raw + "'");
    const char* s = item.c_str();
    char* end = nullptr;
    const long long v = std::strtoll(s, &end, 10);
    if (end == s || *end != '\0')
      throw ConfigError("key '" + key + "': expected integer list, got '" + raw + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::vector<long long> KVConfig::get_int_list(const std::string& key,
                                              const std::vector<long long>& def) const {
  return has(key) ? get_int_list(key) : def;
}

std::string KVConfig::get_enum(const std::string& key, const std::vector<std::string>& allowed,
                               const std::string& def) const {
  const std::string v = get_string(key, def);
  for (const auto& a : allowed)
    if (v == a) return v;
  std::string msg = "key '" + key + "': invalid value '" + v + "', expected one of {";
  for (std::size_t i = 0; i < allowed.size(); ++i) {
    if (i) msg += ", ";
    msg += allowed[i];
  }
  msg += "}";
  throw ConfigError(msg);
}

std::string KVConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += "=";
    out += v;
    out += "\n";
  }
  return out;
}

}  // namespace blindspot
