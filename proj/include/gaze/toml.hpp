#pragma once

// Small TOML reader/writer covering the subset used by dataset definitions
// and pipeline configs: tables, arrays of tables, dotted keys, basic and
// literal strings, integers, floats, booleans, arrays. Errors carry 1-based
// line numbers. Dates, inline tables and multi-line strings are not needed
// by any config this library reads and are rejected.

#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gaze/detail/strings.hpp"
#include "gaze/error.hpp"

namespace gaze::toml {

class Value;
using Array = std::vector<Value>;
using Table = std::map<std::string, Value>;

class Value {
 public:
  Value() : v_(std::string()) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(std::int64_t i) : v_(i) {}
  Value(double d) : v_(d) {}
  Value(bool b) : v_(b) {}
  Value(Array a) : v_(std::move(a)) {}
  Value(Table t) : v_(std::move(t)) {}

  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_float() const { return std::holds_alternative<double>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_array() const { return std::holds_alternative<Array>(v_); }
  bool is_table() const { return std::holds_alternative<Table>(v_); }

  const std::string& as_string() const { return get<std::string>("string"); }
  std::int64_t as_int() const { return get<std::int64_t>("integer"); }
  bool as_bool() const { return get<bool>("boolean"); }
  const Array& as_array() const { return get<Array>("array"); }
  const Table& as_table() const { return get<Table>("table"); }
  Table& as_table() {
    return const_cast<Table&>(std::as_const(*this).as_table());
  }
  Array& as_array() {
    return const_cast<Array&>(std::as_const(*this).as_array());
  }

  /// Numeric accessor: integers widen to double.
  double as_float() const {
    if (is_int()) return static_cast<double>(std::get<std::int64_t>(v_));
    return get<double>("float");
  }

  bool operator==(const Value& other) const = default;

 private:
  template <class T>
  const T& get(const char* what) const {
    if (!std::holds_alternative<T>(v_))
      detail::raise(ErrorKind::Parse,
                    std::string("value is not a ") + what);
    return std::get<T>(v_);
  }

  std::variant<std::string, std::int64_t, double, bool, Array, Table> v_;
};

namespace detail_toml {

inline bool bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Table run() {
    Table root;
    Table* current = &root;
    std::string current_path;
    while (next_line()) {
      std::string_view line = gaze::detail::trim(strip_comment(line_));
      if (line.empty()) continue;
      if (line.front() == '[') {
        const bool array_table = line.size() > 1 && line[1] == '[';
        const auto closer = array_table ? std::string_view("]]")
                                        : std::string_view("]");
        if (line.size() < 2 + 2 * closer.size() ||
            line.substr(line.size() - closer.size()) != closer)
          fail("malformed table header");
        auto inner = gaze::detail::trim(line.substr(
            array_table ? 2 : 1, line.size() - 2 * (array_table ? 2 : 1)));
        auto path = parse_key_path(inner);
        if (array_table)
          current = open_array_table(root, path, current_path);
        else
          current = open_table(root, path, current_path);
        continue;
      }
      parse_key_value(*current, current_path, line);
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    gaze::detail::raise(ErrorKind::Parse,
                        "line " + std::to_string(lineno_) + ": " + msg);
  }

  bool next_line() {
    if (pos_ >= text_.size()) return false;
    const auto nl = text_.find('\n', pos_);
    const auto end = nl == std::string_view::npos ? text_.size() : nl;
    line_ = text_.substr(pos_, end - pos_);
    if (!line_.empty() && line_.back() == '\r') line_.remove_suffix(1);
    pos_ = end + 1;
    ++lineno_;
    return true;
  }

  std::string_view strip_comment(std::string_view s) const {
    bool in_basic = false, in_literal = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      if (in_basic) {
        if (c == '\\') ++i;
        else if (c == '"') in_basic = false;
      } else if (in_literal) {
        if (c == '\'') in_literal = false;
      } else if (c == '"') {
        in_basic = true;
      } else if (c == '\'') {
        in_literal = true;
      } else if (c == '#') {
        return s.substr(0, i);
      }
    }
    if (in_basic || in_literal) fail("unterminated string");
    return s;
  }

  std::vector<std::string> parse_key_path(std::string_view s) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (true) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
        ++i;
      if (i >= s.size()) fail("empty key");
      std::string part;
      if (s[i] == '"' || s[i] == '\'') {
        const char quote = s[i];
        ++i;
        while (i < s.size() && s[i] != quote) part += s[i++];
        if (i >= s.size()) fail("unterminated quoted key");
        ++i;
      } else {
        while (i < s.size() && bare_key_char(s[i])) part += s[i++];
        if (part.empty()) fail("invalid key character");
      }
      parts.push_back(std::move(part));
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
        ++i;
      if (i >= s.size()) return parts;
      if (s[i] != '.') fail("expected '.' in dotted key");
      ++i;
    }
  }

  Table* open_table(Table& root, const std::vector<std::string>& path,
                    std::string& current_path) {
    Table* t = &root;
    std::string p;
    for (std::size_t k = 0; k < path.size(); ++k) {
      p += p.empty() ? path[k] : "." + path[k];
      t = descend(*t, path[k], p, k + 1 == path.size());
    }
    if (!explicit_tables_.insert(p).second)
      fail("table [" + p + "] defined twice");
    current_path = p;
    return t;
  }

  Table* descend(Table& t, const std::string& key, const std::string& p,
                 bool /*last*/) {
    auto it = t.find(key);
    if (it == t.end())
      it = t.emplace(key, Value(Table{})).first;
    Value& v = it->second;
    if (v.is_table()) return &v.as_table();
    if (v.is_array()) {
      auto& arr = v.as_array();
      if (!arr.empty() && arr.back().is_table()) return &arr.back().as_table();
      fail("key '" + p + "' is not a table");
    }
    fail("key '" + p + "' is not a table");
  }

  Table* open_array_table(Table& root, const std::vector<std::string>& path,
                          std::string& current_path) {
    Table* t = &root;
    std::string p;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      p += p.empty() ? path[k] : "." + path[k];
      t = descend(*t, path[k], p, false);
    }
    const std::string& leaf = path.back();
    p += p.empty() ? leaf : "." + leaf;
    auto it = t->find(leaf);
    if (it == t->end()) it = t->emplace(leaf, Value(Array{})).first;
    if (!it->second.is_array() ||
        (!it->second.as_array().empty() &&
         !it->second.as_array().back().is_table()))
      fail("key '" + p + "' is not an array of tables");
    auto& arr = it->second.as_array();
    arr.emplace_back(Table{});
    current_path = p + "[" + std::to_string(arr.size() - 1) + "]";
    return &arr.back().as_table();
  }

  void parse_key_value(Table& table, const std::string& table_path,
                       std::string_view line) {
    const auto eq = find_unquoted_eq(line);
    if (eq == std::string_view::npos) fail("expected 'key = value'");
    auto path = parse_key_path(gaze::detail::trim(line.substr(0, eq)));
    auto value_text = gaze::detail::trim(line.substr(eq + 1));
    if (value_text.empty()) fail("missing value");

    Table* t = &table;
    std::string p = table_path;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      p += p.empty() ? path[k] : "." + path[k];
      t = descend(*t, path[k], p, false);
    }
    const std::string& leaf = path.back();
    if (t->count(leaf))
      fail("duplicate key '" + (p.empty() ? leaf : p + "." + leaf) + "'");

    std::size_t i = 0;
    Value v = parse_value(value_text, i);
    skip_ws(value_text, i);
    if (i != value_text.size()) fail("trailing characters after value");
    t->emplace(leaf, std::move(v));
  }

  static std::size_t find_unquoted_eq(std::string_view s) {
    bool in_basic = false, in_literal = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      if (in_basic) {
        if (c == '\\') ++i;
        else if (c == '"') in_basic = false;
      } else if (in_literal) {
        if (c == '\'') in_literal = false;
      } else if (c == '"') {
        in_basic = true;
      } else if (c == '\'') {
        in_literal = true;
      } else if (c == '=') {
        return i;
      }
    }
    return std::string_view::npos;
  }

  void skip_ws(std::string_view s, std::size_t& i) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }

  Value parse_value(std::string_view s, std::size_t& i) {
    skip_ws(s, i);
    if (i >= s.size()) fail("missing value");
    const char c = s[i];
    if (c == '"') return parse_basic_string(s, i);
    if (c == '\'') return parse_literal_string(s, i);
    if (c == '[') return parse_array(s, i);
    if (s.substr(i, 4) == "true" && !value_continues(s, i + 4)) {
      i += 4;
      return Value(true);
    }
    if (s.substr(i, 5) == "false" && !value_continues(s, i + 5)) {
      i += 5;
      return Value(false);
    }
    return parse_number(s, i);
  }

  static bool value_continues(std::string_view s, std::size_t i) {
    return i < s.size() && bare_key_char(s[i]);
  }

  Value parse_basic_string(std::string_view s, std::size_t& i) {
    ++i;  // opening quote
    std::string out;
    while (i < s.size() && s[i] != '"') {
      char c = s[i++];
      if (c != '\\') {
        out += c;
        continue;
      }
      if (i >= s.size()) fail("dangling escape");
      const char e = s[i++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'u': {
          if (i + 4 > s.size()) fail("truncated \\u escape");
          unsigned code = 0;
          for (int k = 0; k < 4; ++k) {
            const char h = s[i++];
            code <<= 4;
            if (h >= '0' && h <= '9') code |= static_cast<unsigned>(h - '0');
            else if (h >= 'a' && h <= 'f')
              code |= static_cast<unsigned>(h - 'a' + 10);
            else if (h >= 'A' && h <= 'F')
              code |= static_cast<unsigned>(h - 'A' + 10);
            else fail("invalid \\u escape digit");
          }
          append_utf8(out, code);
          break;
        }
        default:
          fail(std::string("unsupported escape \\") + e);
      }
    }
    if (i >= s.size()) fail("unterminated string");
    ++i;  // closing quote
    return Value(std::move(out));
  }

  static void append_utf8(std::string& out, unsigned code) {
    if (code < 0x80) {
      out += static_cast<char>(code);
    } else if (code < 0x800) {
      out += static_cast<char>(0xC0 | (code >> 6));
      out += static_cast<char>(0x80 | (code & 0x3F));
    } else {
      out += static_cast<char>(0xE0 | (code >> 12));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (code & 0x3F));
    }
  }

  Value parse_literal_string(std::string_view s, std::size_t& i) {
    ++i;
    std::string out;
    while (i < s.size() && s[i] != '\'') out += s[i++];
    if (i >= s.size()) fail("unterminated literal string");
    ++i;
    return Value(std::move(out));
  }

  Value parse_array(std::string_view s, std::size_t& i) {
    ++i;  // '['
    Array arr;
    while (true) {
      skip_ws(s, i);
      if (i >= s.size()) fail("unterminated array");
      if (s[i] == ']') {
        ++i;
        return Value(std::move(arr));
      }
      arr.push_back(parse_value(s, i));
      skip_ws(s, i);
      if (i >= s.size()) fail("unterminated array");
      if (s[i] == ',') {
        ++i;
      } else if (s[i] != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  Value parse_number(std::string_view s, std::size_t& i) {
    const std::size_t start = i;
    while (i < s.size() && (bare_key_char(s[i]) || s[i] == '+' || s[i] == '.'))
      ++i;
    std::string token(s.substr(start, i - start));
    if (token.empty()) fail("expected a value");
    std::string cleaned;
    for (char c : token)
      if (c != '_') cleaned += c;
    if (!cleaned.empty() && cleaned.front() == '+') cleaned.erase(0, 1);
    const bool fractional = cleaned.find_first_of(".eE") != std::string::npos &&
                            cleaned.find("0x") != 0;
    if (!fractional) {
      if (auto v = gaze::detail::parse_int(cleaned))
        return Value(static_cast<std::int64_t>(*v));
    }
    if (auto v = gaze::detail::parse_double(cleaned)) return Value(*v);
    fail("malformed value '" + token + "'");
  }

  std::string_view text_;
  std::string_view line_;
  std::size_t pos_ = 0;
  std::size_t lineno_ = 0;
  std::set<std::string> explicit_tables_;
};

inline void write_value(std::string& out, const Value& v);

inline bool needs_quotes(const std::string& key) {
  if (key.empty()) return true;
  for (char c : key)
    if (!bare_key_char(c)) return true;
  return false;
}

inline void write_string(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
}

inline void write_key(std::string& out, const std::string& key) {
  if (needs_quotes(key))
    write_string(out, key);
  else
    out += key;
}

inline void write_value(std::string& out, const Value& v) {
  if (v.is_string()) {
    write_string(out, v.as_string());
  } else if (v.is_int()) {
    out += std::to_string(v.as_int());
  } else if (v.is_float()) {
    out += gaze::detail::format_double(v.as_float());
  } else if (v.is_bool()) {
    out += v.as_bool() ? "true" : "false";
  } else if (v.is_array()) {
    out += '[';
    const auto& arr = v.as_array();
    for (std::size_t k = 0; k < arr.size(); ++k) {
      if (k) out += ", ";
      write_value(out, arr[k]);
    }
    out += ']';
  } else {
    detail::raise(ErrorKind::InvalidArgument,
                  "inline tables are not serializable");
  }
}

inline void write_table(std::string& out, const Table& t,
                        const std::string& prefix) {
  // Scalars and plain arrays first, then subtables, then arrays of tables.
  for (const auto& [key, value] : t) {
    if (value.is_table()) continue;
    if (value.is_array() && !value.as_array().empty() &&
        value.as_array().front().is_table())
      continue;
    write_key(out, key);
    out += " = ";
    write_value(out, value);
    out += '\n';
  }
  for (const auto& [key, value] : t) {
    if (!value.is_table()) continue;
    const std::string path =
        prefix.empty() ? key : prefix + "." + key;
    out += "\n[";
    out += path;
    out += "]\n";
    write_table(out, value.as_table(), path);
  }
  for (const auto& [key, value] : t) {
    if (!value.is_array() || value.as_array().empty() ||
        !value.as_array().front().is_table())
      continue;
    const std::string path =
        prefix.empty() ? key : prefix + "." + key;
    for (const auto& elem : value.as_array()) {
      out += "\n[[";
      out += path;
      out += "]]\n";
      write_table(out, elem.as_table(), path);
    }
  }
}

}  // namespace detail_toml

inline Table parse(std::string_view text) {
  return detail_toml::Parser(text).run();
}

inline std::string serialize(const Table& t) {
  std::string out;
  detail_toml::write_table(out, t, "");
  return out;
}

// ---- typed lookup helpers --------------------------------------------------

inline const Value* find(const Table& t, const std::string& key) {
  auto it = t.find(key);
  return it == t.end() ? nullptr : &it->second;
}

inline const Value& require(const Table& t, const std::string& key,
                            const std::string& context) {
  if (const Value* v = find(t, key)) return *v;
  detail::raise(ErrorKind::Parse,
                "missing required key '" + key + "' in " + context);
}

}  // namespace gaze::toml
