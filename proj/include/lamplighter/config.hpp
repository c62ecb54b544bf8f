#pragma once

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lamplighter/error.hpp"

namespace lamplighter {

struct OptionInfo {
  const char* key;
  const char* help;
};

/// Every parameter key accepted in config files and as --key flags.
inline const std::vector<OptionInfo>& option_table() {
  static const std::vector<OptionInfo> table = {
      {"p", "drift toward the origin, in (1/2, 1)"},
      {"lambda", "homesick parameter (> 1 for simulation)"},
      {"lamp", "order of the cyclic lamp group"},
      {"lamp-group", "cyclic or integers"},
      {"measure", "switch measure as element:prob pairs, e.g. -1:0.25,0:0.5,1:0.25"},
      {"graph", "base graph: line, gamma_m or edges"},
      {"m", "number of copies of each split vertex (gamma_m)"},
      {"edges", "edge-list file (graph=edges)"},
      {"radius", "truncation radius of the base graph"},
      {"k", "excursion count(s), comma separated"},
      {"n", "step horizon(s), comma separated"},
      {"m-pos", "number of positive excursions"},
      {"count", "series argument (number of excursions)"},
      {"x", "excursion maximum(s), comma separated"},
      {"t", "half return time(s), comma separated"},
      {"s", "MGF argument"},
      {"r", "radius or radii, comma separated"},
      {"c", "range-bound exponent in (0, 1)"},
      {"mplus", "maximum of the path"},
      {"mminus", "minimum of the path"},
      {"local-times", "vertex:count pairs, e.g. 0:2,1:1"},
      {"grid", "lambda grid for scans, comma separated"},
      {"k-lo", "lower end of the scan window"},
      {"k-hi", "upper end of the scan window"},
      {"window", "number of log-spaced window points"},
      {"max-len", "maximum path length for oracles"},
      {"estimator", "indicator or conditional (return-probability estimates)"},
      {"replicas", "number of Monte Carlo replicas"},
      {"seed", "master seed"},
      {"tol", "series tolerance / oracle tolerance"},
      {"budget", "step budget per run"},
      {"out", "output CSV path (stdout when absent)"},
  };
  return table;
}

inline bool is_known_option(const std::string& key) {
  const auto& t = option_table();
  return std::any_of(t.begin(), t.end(), [&](const OptionInfo& o) { return key == o.key; });
}

/// Command, operation and flat parameter map. Accessors record which keys
/// were read so that leftover keys can be reported as errors.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;
  ExperimentConfig(std::string command, std::string op) : command_(std::move(command)), op_(std::move(op)) {}

  const std::string& command() const noexcept { return command_; }
  const std::string& op() const noexcept { return op_; }
  void set_command(std::string command, std::string op) {
    command_ = std::move(command);
    op_ = std::move(op);
  }

  void set(const std::string& key, const std::string& value) {
    if (!is_known_option(key)) throw ConfigError("unknown option '" + key + "'");
    values_[key] = value;
  }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  std::optional<std::string> text(const std::string& key) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  std::string text_or(const std::string& key, const std::string& fallback) const {
    return text(key).value_or(fallback);
  }
  std::string required_text(const std::string& key) const {
    auto v = text(key);
    if (!v) throw ConfigError("missing required option '" + key + "'");
    return *v;
  }

  std::optional<double> real(const std::string& key) const {
    auto v = text(key);
    if (!v) return std::nullopt;
    return parse_real(key, *v);
  }
  double real_or(const std::string& key, double fallback) const { return real(key).value_or(fallback); }
  double required_real(const std::string& key) const { return parse_real(key, required_text(key)); }

  std::optional<std::int64_t> integer(const std::string& key) const {
    auto v = text(key);
    if (!v) return std::nullopt;
    return parse_integer(key, *v);
  }
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const {
    return integer(key).value_or(fallback);
  }
  std::int64_t required_integer(const std::string& key) const {
    return parse_integer(key, required_text(key));
  }
  std::uint64_t count_or(const std::string& key, std::uint64_t fallback) const {
    auto v = integer(key);
    if (!v) return fallback;
    if (*v < 0) throw ConfigError("option '" + key + "' must be nonnegative");
    return static_cast<std::uint64_t>(*v);
  }
  std::uint64_t required_count(const std::string& key) const {
    const auto v = required_integer(key);
    if (v < 0) throw ConfigError("option '" + key + "' must be nonnegative");
    return static_cast<std::uint64_t>(v);
  }

  std::vector<std::uint64_t> required_counts(const std::string& key) const {
    std::vector<std::uint64_t> out;
    for (const auto& item : split(required_text(key), ',')) {
      const auto v = parse_integer(key, item);
      if (v < 0) throw ConfigError("option '" + key + "' must be nonnegative");
      out.push_back(static_cast<std::uint64_t>(v));
    }
    return out;
  }
  std::vector<double> required_reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split(required_text(key), ',')) out.push_back(parse_real(key, item));
    return out;
  }

  /// Throws for keys that were set but never read by the command.
  void reject_unused() const {
    for (const auto& [key, value] : values_)
      if (key != "out" && !used_.count(key))
        throw ConfigError("option '" + key + "' is not used by '" + command_ + " " + op_ + "'");
  }

  /// Canonical text of the configuration (output path excluded).
  std::string canonical() const {
    std::string s = command_ + "\n" + op_ + "\n";
    for (const auto& [key, value] : values_)
      if (key != "out") s += key + "=" + value + "\n";
    return s;
  }

  /// FNV-1a hash of the canonical text, as 16 hex digits.
  std::string hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical()) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  static std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos) throw ConfigError("empty list item in '" + text + "'");
      out.push_back(item.substr(b, e - b + 1));
    }
    if (out.empty()) throw ConfigError("empty list");
    return out;
  }

  static double parse_real(const std::string& key, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0' || errno == ERANGE)
      throw ConfigError("option '" + key + "' expects a number, got '" + text + "'");
    return v;
  }

  static std::int64_t parse_integer(const std::string& key, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || *end != '\0' || errno == ERANGE) {
      // Accept integral values written in floating notation, e.g. 1e6.
      const double d = parse_real(key, text);
      if (d != std::floor(d) || std::abs(d) > 9.0e18)
        throw ConfigError("option '" + key + "' expects an integer, got '" + text + "'");
      return static_cast<std::int64_t>(d);
    }
    return v;
  }

 private:
  std::string command_;
  std::string op_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

/// Reads `key = value` lines; '#' starts a comment.
inline void load_config_file(std::istream& in, ExperimentConfig& config) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto first = s.find_first_not_of(" \t\r");
      const auto last = s.find_last_not_of(" \t\r");
      return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    config.set(key, value);
  }
}

inline void load_config_file(const std::string& path, ExperimentConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  load_config_file(in, config);
}

}  // namespace lamplighter
