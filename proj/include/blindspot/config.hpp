#pragma once

// Plain-text key=value configuration.
//
// Format: one `key = value` per line; `#` starts a comment (full line or
// trailing); blank lines ignored; keys are dotted lowercase identifiers.
// Values keep their raw string form; typed accessors parse on demand and
// raise ConfigError with the offending key on any failure.

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace blindspot {

class KVConfig {
 public:
  KVConfig() = default;

  static KVConfig parse_file(const std::string& path);
  static KVConfig parse_text(const std::string& text, const std::string& origin = "<text>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  // Required accessors: throw ConfigError if the key is absent or malformed.
  std::string get_string(const std::string& key) const;
  long long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  // Defaulted accessors.
  std::string get_string(const std::string& key, const std::string& def) const;
  long long get_int(const std::string& key, long long def) const;
  double get_double(const std::string& key, double def) const;
  bool get_bool(const std::string& key, bool def) const;

  // Comma-separated integer list (e.g. "1000,2000,4000").
  std::vector<long long> get_int_list(const std::string& key) const;
  std::vector<long long> get_int_list(const std::string& key, const std::vector<long long>& def) const;

  // Validates that the value is one of `allowed`, returns it.
  std::string get_enum(const std::string& key, const std::vector<std::string>& allowed,
                       const std::string& def) const;

  // All keys, sorted (std::map iteration order).
  const std::map<std::string, std::string>& entries() const { return values_; }

  // Canonical one-line-per-key rendering used for config hashing.
  std::string canonical_text() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace blindspot
