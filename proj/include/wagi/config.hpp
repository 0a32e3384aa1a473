#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wagi {

/// Flat TOML-like configuration: `key = value` lines, `#` comments, optional
/// `[section]` headers that prefix keys as `section.key`, and values that are
/// bare words, numbers, true/false or double-quoted strings.
class KeyValueConfig {
 public:
  /// Throws ArgumentError naming the offending line.
  static KeyValueConfig parse(std::string_view text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::vector<std::string> keys() const;

  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace wagi
