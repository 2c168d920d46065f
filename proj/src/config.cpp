#include "orbilab/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace orbilab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

ConfigValue parse_scalar(const std::string& raw, int line_no) {
  const std::string s = trim(raw);
  if (s.empty()) {
    throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty value");
  }
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unterminated string");
    }
    return ConfigValue{s.substr(1, s.size() - 2)};
  }
  if (s == "true") return ConfigValue{true};
  if (s == "false") return ConfigValue{false};
  if (s.front() == '[') {
    if (s.back() != ']') {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unterminated array");
    }
    std::vector<double> items;
    std::string inner = s.substr(1, s.size() - 2);
    std::stringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const std::string t = trim(tok);
      if (t.empty()) continue;
      items.push_back(std::stod(t));
    }
    return ConfigValue{items};
  }
  // integer or float
  try {
    std::size_t pos = 0;
    if (s.find_first_of(".eE") == std::string::npos) {
      const long long v = std::stoll(s, &pos);
      if (pos == s.size()) return ConfigValue{v};
    }
    const double d = std::stod(s, &pos);
    if (pos == s.size()) return ConfigValue{d};
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config line " + std::to_string(line_no) +
                              ": cannot parse value '" + s + "'");
}

}  // namespace

std::string ConfigValue::as_string() const {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  throw std::invalid_argument("config: expected string value");
}

long long ConfigValue::as_int() const {
  if (const auto* v = std::get_if<long long>(&value)) return *v;
  throw std::invalid_argument("config: expected integer value");
}

double ConfigValue::as_double() const {
  if (const auto* v = std::get_if<double>(&value)) return *v;
  if (const auto* v = std::get_if<long long>(&value)) return static_cast<double>(*v);
  throw std::invalid_argument("config: expected numeric value");
}

bool ConfigValue::as_bool() const {
  if (const auto* v = std::get_if<bool>(&value)) return *v;
  throw std::invalid_argument("config: expected boolean value");
}

std::vector<double> ConfigValue::as_double_list() const {
  if (const auto* v = std::get_if<std::vector<double>>(&value)) return *v;
  throw std::invalid_argument("config: expected numeric array");
}

std::string ConfigValue::echo() const {
  struct Visitor {
    std::string operator()(const std::string& s) const { return "\"" + s + "\""; }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::vector<double>& items) const {
      std::string out = "[";
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += format_double(items[i]);
      }
      return out + "]";
    }
  };
  return std::visit(Visitor{}, value);
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    // strip comments outside strings
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line = line.substr(0, i);
        break;
      }
    }
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": malformed section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    }
    const std::string full_key = section.empty() ? key : section + "." + key;
    cfg.values_[full_key] = parse_scalar(t.substr(eq + 1), line_no);
  }
  return cfg;
}

const ConfigValue& Config::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw std::invalid_argument("config: missing required key '" + key + "'");
  }
  return it->second;
}

std::string Config::get_string(const std::string& key) const { return at(key).as_string(); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? at(key).as_string() : fallback;
}

long long Config::get_int(const std::string& key) const { return at(key).as_int(); }

long long Config::get_int(const std::string& key, long long fallback) const {
  return has(key) ? at(key).as_int() : fallback;
}

double Config::get_double(const std::string& key) const { return at(key).as_double(); }

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? at(key).as_double() : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? at(key).as_bool() : fallback;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  return at(key).as_double_list();
}

}  // namespace orbilab
