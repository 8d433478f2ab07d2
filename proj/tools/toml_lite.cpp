#include "toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pikan/error.hpp"

namespace pikan::cli::toml {

namespace {

using nlohmann::json;

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  json document() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = &open_table(root);
      } else {
        key_value(*table);
      }
      end_of_line();
    }
    return root;
  }

  json single_value() {
    skip_ws();
    json v = value();
    skip_ws();
    if (!eof()) fail("trailing characters after value");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + why);
  }

  bool eof() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0'; }
  char get() {
    const char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() == '\n') {
        get();
      } else {
        return;
      }
    }
  }

  // Whitespace, comments and newlines inside arrays and inline tables.
  void skip_space_in_container() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r' || peek() == '\n') {
        get();
      } else {
        return;
      }
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("expected end of line");
    get();
  }

  static bool bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string key_part() {
    skip_ws();
    if (peek() == '"') return basic_string();
    if (peek() == '\'') return literal_string();
    std::string k;
    while (!eof() && bare_char(peek())) k.push_back(get());
    if (k.empty()) fail("expected a key");
    return k;
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> parts{key_part()};
    skip_ws();
    while (peek() == '.') {
      ++pos_;
      parts.push_back(key_part());
      skip_ws();
    }
    return parts;
  }

  json& descend(json& base, const std::vector<std::string>& parts, std::size_t count) {
    json* node = &base;
    for (std::size_t i = 0; i < count; ++i) {
      json& child = (*node)[parts[i]];
      if (child.is_null()) child = json::object();
      if (!child.is_object()) fail("key '" + parts[i] + "' is not a table");
      node = &child;
    }
    return *node;
  }

  json& open_table(json& root) {
    ++pos_;
    if (peek() == '[') fail("arrays of tables are not supported");
    const auto parts = dotted_key();
    skip_ws();
    if (peek() != ']') fail("expected ']' after table name");
    ++pos_;
    return descend(root, parts, parts.size());
  }

  void key_value(json& table) {
    const auto parts = dotted_key();
    skip_ws();
    if (peek() != '=') fail("expected '=' after key");
    ++pos_;
    skip_ws();
    json& parent = descend(table, parts, parts.size() - 1);
    if (parent.contains(parts.back())) fail("duplicate key '" + parts.back() + "'");
    parent[parts.back()] = value();
  }

  json value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    if (c == '{') return inline_table();
    return scalar();
  }

  std::string basic_string() {
    ++pos_;
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (eof()) fail("unterminated escape");
      const char e = get();
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
  }

  std::string literal_string() {
    ++pos_;
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '\'') return out;
      out.push_back(c);
    }
  }

  json array() {
    ++pos_;
    json arr = json::array();
    while (true) {
      skip_space_in_container();
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(value());
      skip_space_in_container();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  json inline_table() {
    ++pos_;
    json t = json::object();
    skip_ws();
    if (peek() == '}') {
      ++pos_;
      return t;
    }
    while (true) {
      key_value(t);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() == '}') {
        ++pos_;
        return t;
      } else {
        fail("expected ',' or '}' in inline table");
      }
    }
  }

  json scalar() {
    std::string tok;
    while (!eof() && peek() != ',' && peek() != ']' && peek() != '}' && peek() != '\n' && peek() != '\r' &&
           peek() != '#' && peek() != ' ' && peek() != '\t') {
      tok.push_back(get());
    }
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
    if (tok == "-inf") return -std::numeric_limits<double>::infinity();
    if (tok == "nan" || tok == "+nan" || tok == "-nan") return std::numeric_limits<double>::quiet_NaN();
    if (is_date(tok)) return tok;

    std::string digits;
    for (char ch : tok) {
      if (ch != '_') digits.push_back(ch);
    }
    const bool is_float = digits.find_first_of(".eE") != std::string::npos;
    const char* first = digits.data() + (digits[0] == '+' ? 1 : 0);
    const char* last = digits.data() + digits.size();
    if (is_float) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && p == last) return v;
    } else {
      long long v = 0;
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && p == last) return v;
    }
    fail("cannot parse value '" + tok + "'");
  }

  static bool is_date(const std::string& t) {
    if (t.size() != 10 || t[4] != '-' || t[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
      if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    }
    return true;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

nlohmann::json parse(std::string_view text) { return Parser(text).document(); }

nlohmann::json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::json parse_value(std::string_view text) {
  try {
    return Parser(text).single_value();
  } catch (const ConfigError&) {
    return std::string(text);
  }
}

}  // namespace pikan::cli::toml
