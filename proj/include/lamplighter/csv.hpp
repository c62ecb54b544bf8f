#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace lamplighter::csv {

/// Shortest round-trip-safe text for a double; NaN becomes an empty cell.
inline std::string cell(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string cell(const char* s) { return cell(std::string(s)); }
inline std::string cell(bool b) { return b ? "1" : "0"; }

template <class T, std::enable_if_t<std::is_integral_v<T> && !std::is_same_v<T, bool>, int> = 0>
std::string cell(T v) {
  return std::to_string(v);
}

/// CSV document: a comment line carrying the config hash, a header row and
/// data rows, followed by optional trailing comments.
class Writer {
 public:
  Writer(std::ostream& out, const std::string& config_hash, std::vector<std::string> header)
      : out_(&out), width_(header.size()) {
    *out_ << "# config_hash=" << config_hash << '\n';
    write_row(header);
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    static_assert(sizeof...(Cells) > 0);
    write_row({cell(cells)...});
  }

  void comment(const std::string& text) { *out_ << "# " << text << '\n'; }

 private:
  void write_row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("CSV row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) *out_ << ',';
      *out_ << cells[i];
    }
    *out_ << '\n';
  }

  std::ostream* out_;
  std::size_t width_;
};

}  // namespace lamplighter::csv
