// Internal line/token helpers shared by the text-format parsers.
#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "diatrack/errors.hpp"

namespace diatrack::detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

/// Iterates lines of a document, tracking 1-based line numbers and
/// skipping comments (`#`) and blank lines unless asked not to.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  /// Next raw line, or false at end of input.
  bool next_raw(std::string& line) {
    if (pos_ > text_.size()) return false;
    if (pos_ == text_.size()) {
      // A trailing newline does not produce an extra empty line.
      pos_ = text_.size() + 1;
      return false;
    }
    std::size_t nl = text_.find('\n', pos_);
    if (nl == std::string_view::npos) {
      line = std::string(text_.substr(pos_));
      pos_ = text_.size() + 1;
    } else {
      line = std::string(text_.substr(pos_, nl - pos_));
      pos_ = nl + 1;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no_;
    return true;
  }

  /// Next meaningful line (trimmed, non-empty, non-comment).
  bool next(std::string& line) {
    std::string raw;
    while (next_raw(raw)) {
      std::string t = trim(raw);
      if (t.empty() || t[0] == '#') continue;
      line = std::move(t);
      return true;
    }
    return false;
  }

  int line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace diatrack::detail
