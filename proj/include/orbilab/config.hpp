#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace orbilab {

// A configuration value: string, integer, float, boolean, or a numeric list.
struct ConfigValue {
  std::variant<std::string, long long, double, bool, std::vector<double>> value;

  std::string as_string() const;
  long long as_int() const;
  double as_double() const;  // accepts integers
  bool as_bool() const;
  std::vector<double> as_double_list() const;

  std::string echo() const;  // round-trippable literal for artifact headers
};

// Flat key-value view of a TOML file. Supported subset: comments (#),
// [section] headers (keys become section.key), strings, integers, floats,
// booleans, and arrays of numbers; enough for experiment configs while
// staying diff-friendly.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const ConfigValue& at(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;

  void set(const std::string& key, ConfigValue v) { values_[key] = std::move(v); }

  const std::map<std::string, ConfigValue>& entries() const { return values_; }

 private:
  std::map<std::string, ConfigValue> values_;
};

}  // namespace orbilab
