#pragma once

// Declarative dataset definitions: where to download resources, how session
// files are named, the recording geometry, and which parser/schema reads the
// raw files. Definitions live in TOML files; parse_definition/serialize are
// exact inverses so registries can rewrite what they read.

#include <boost/regex.hpp>

#include <cctype>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gaze/core.hpp"
#include "gaze/io/csv.hpp"
#include "gaze/toml.hpp"

namespace gaze {

/// Regular expression over session file basenames whose named capture groups
/// become SessionMeta keys. Accepts both the (?<name>...) spelling and the
/// (?P<name>...) one common in other tools. Only matched, non-empty groups
/// populate the resulting metadata.
class FilenamePattern {
 public:
  explicit FilenamePattern(std::string pattern) : text_(std::move(pattern)) {
    const std::string normalized = normalize(text_);
    group_names_ = scan_group_names(normalized);
    for (const auto& name : group_names_)
      if (!valid_key(name))
        detail::raise(ErrorKind::Definition,
                      "filename_pattern group '" + name +
                          "' is not a valid session key");
    try {
      re_ = boost::regex(normalized, boost::regex::perl);
    } catch (const boost::regex_error& e) {
      detail::raise(ErrorKind::Definition,
                    std::string("filename_pattern does not compile: ") +
                        e.what());
    }
  }

  const std::string& text() const { return text_; }
  const std::vector<std::string>& group_names() const { return group_names_; }

  /// Full match against a basename; nullopt when the name does not match.
  std::optional<SessionMeta> match(const std::string& basename) const {
    boost::smatch m;
    if (!boost::regex_match(basename, m, re_)) return std::nullopt;
    std::map<std::string, std::string> items;
    for (const auto& name : group_names_) {
      const auto& sub = m[name];
      if (sub.matched && sub.length() > 0) items.emplace(name, sub.str());
    }
    return SessionMeta(std::move(items));
  }

 private:
  static std::string normalize(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.compare(i, 4, "(?P<") == 0) {
        out += "(?<";
        i += 3;
      } else {
        out += s[i];
        if (s[i] == '\\' && i + 1 < s.size()) out += s[++i];
      }
    }
    return out;
  }

  static bool valid_key(const std::string& name) {
    if (name.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_')
      return false;
    for (char c : name)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
        return false;
    return true;
  }

  /// The regex engine cannot enumerate named groups, so scan the pattern:
  /// "(?<name>" outside character classes, ignoring escapes and lookbehinds.
  static std::vector<std::string> scan_group_names(const std::string& s) {
    std::vector<std::string> names;
    bool in_class = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      if (c == '\\') {
        ++i;
        continue;
      }
      if (in_class) {
        if (c == ']') in_class = false;
        continue;
      }
      if (c == '[') {
        in_class = true;
        continue;
      }
      if (c == '(' && i + 2 < s.size() && s[i + 1] == '?' && s[i + 2] == '<') {
        const std::size_t start = i + 3;
        if (start < s.size() && (s[start] == '=' || s[start] == '!'))
          continue;  // lookbehind, not a named group
        const auto close = s.find('>', start);
        if (close == std::string::npos)
          detail::raise(ErrorKind::Definition,
                        "filename_pattern has an unterminated group name");
        names.push_back(s.substr(start, close - start));
        i = close;
      }
    }
    return names;
  }

  std::string text_;
  std::vector<std::string> group_names_;
  boost::regex re_;
};

enum class ArchiveKind { None, Zip, TarGz };

inline std::string archive_kind_name(ArchiveKind k) {
  switch (k) {
    case ArchiveKind::None: return "none";
    case ArchiveKind::Zip: return "zip";
    case ArchiveKind::TarGz: return "tar-gz";
  }
  detail::raise(ErrorKind::InvalidArgument, "unknown archive kind");
}

struct Resource {
  std::vector<std::string> mirrors;
  std::string filename;
  std::string sha256;
  ArchiveKind archive = ArchiveKind::None;

  void validate() const {
    if (mirrors.empty())
      detail::raise(ErrorKind::Definition, "resource needs at least 1 mirror");
    for (const auto& m : mirrors)
      if (m.empty())
        detail::raise(ErrorKind::Definition, "resource mirror is empty");
    if (filename.empty() || filename.find('/') != std::string::npos)
      detail::raise(ErrorKind::Definition,
                    "resource filename must be a plain name");
    if (sha256.size() != 64)
      detail::raise(ErrorKind::Definition, "sha256 malformed: need 64 hex digits");
    for (char c : sha256)
      if (!std::isxdigit(static_cast<unsigned char>(c)))
        detail::raise(ErrorKind::Definition,
                      "sha256 malformed: non-hex character");
  }
};

/// Tag for raw tracker text recordings parsed by parse_asc.
struct TrackerDialectSchema {
  bool operator==(const TrackerDialectSchema&) const = default;
};

using DatasetSchema = std::variant<CsvSchema, TrackerDialectSchema>;

struct DatasetDefinition {
  std::string name;
  std::vector<Resource> resources;
  FilenamePattern filename_pattern;
  ExperimentGeometry geometry;
  DatasetSchema schema;
};

namespace detail_def {

[[noreturn]] inline void fail(const std::string& msg) {
  detail::raise(ErrorKind::Definition, msg);
}

inline const toml::Value& need(const toml::Table& t, const std::string& key,
                               const std::string& context) {
  if (const auto* v = toml::find(t, key)) return *v;
  fail("missing required key '" + key + "' in " + context);
}

inline std::string need_string(const toml::Table& t, const std::string& key,
                               const std::string& context) {
  const auto& v = need(t, key, context);
  if (!v.is_string()) fail("key '" + key + "' in " + context + " must be a string");
  return v.as_string();
}

inline double need_number(const toml::Table& t, const std::string& key,
                          const std::string& context) {
  const auto& v = need(t, key, context);
  if (!v.is_float() && !v.is_int())
    fail("key '" + key + "' in " + context + " must be a number");
  return v.as_float();
}

inline Origin parse_origin(const std::string& s) {
  if (s == "upper-left") return Origin::UpperLeft;
  if (s == "center") return Origin::Center;
  fail("origin must be 'upper-left' or 'center', got '" + s + "'");
}

inline ExperimentGeometry parse_geometry(const toml::Table& t) {
  ExperimentGeometry g;
  g.screen_width_px = need_number(t, "screen_width_px", "[geometry]");
  g.screen_height_px = need_number(t, "screen_height_px", "[geometry]");
  g.screen_width_cm = need_number(t, "screen_width_cm", "[geometry]");
  g.screen_height_cm = need_number(t, "screen_height_cm", "[geometry]");
  g.distance_cm = need_number(t, "distance_cm", "[geometry]");
  g.sampling_rate_hz = need_number(t, "sampling_rate_hz", "[geometry]");
  g.origin = parse_origin(need_string(t, "origin", "[geometry]"));
  const auto problems = validate_geometry(g);
  if (!problems.empty()) fail("[geometry] invalid: " + problems.front());
  return g;
}

inline DatasetSchema parse_schema(const toml::Table& t) {
  const std::string kind = need_string(t, "kind", "[schema]");
  if (kind == "asc") return TrackerDialectSchema{};
  if (kind != "csv") fail("schema kind must be 'csv' or 'asc', got '" + kind + "'");
  CsvSchema s;
  if (const auto* sep = toml::find(t, "separator")) {
    if (!sep->is_string() || sep->as_string().size() != 1)
      fail("schema separator must be a single character");
    s.separator = sep->as_string()[0];
  }
  s.time = need_string(t, "time", "[schema]");
  s.x_px = need_string(t, "x_px", "[schema]");
  s.y_px = need_string(t, "y_px", "[schema]");
  if (const auto* p = toml::find(t, "pupil")) {
    if (!p->is_string()) fail("schema pupil must be a string");
    s.pupil = p->as_string();
  }
  if (const auto* u = toml::find(t, "time_unit")) {
    if (!u->is_string() ||
        (u->as_string() != "ms" && u->as_string() != "s"))
      fail("schema time_unit must be 'ms' or 's'");
    s.time_unit = u->as_string() == "s" ? TimeUnit::Seconds
                                        : TimeUnit::Milliseconds;
  }
  if (const auto* m = toml::find(t, "missing")) {
    if (!m->is_array()) fail("schema missing must be an array of strings");
    s.missing_markers.clear();
    for (const auto& v : m->as_array()) {
      if (!v.is_string()) fail("schema missing must be an array of strings");
      s.missing_markers.insert(v.as_string());
    }
  }
  try {
    s.validate();
  } catch (const Error& e) {
    fail(std::string("[schema] invalid: ") + e.what());
  }
  return s;
}

inline ArchiveKind parse_archive(const std::string& s) {
  if (s == "none") return ArchiveKind::None;
  if (s == "zip") return ArchiveKind::Zip;
  if (s == "tar-gz") return ArchiveKind::TarGz;
  fail("archive must be 'none', 'zip' or 'tar-gz', got '" + s + "'");
}

inline Resource parse_resource(const toml::Table& t, std::size_t index) {
  const std::string ctx = "[[resource]] #" + std::to_string(index + 1);
  Resource r;
  const auto& mirrors = need(t, "mirrors", ctx);
  if (!mirrors.is_array()) fail("key 'mirrors' in " + ctx + " must be an array");
  for (const auto& m : mirrors.as_array()) {
    if (!m.is_string()) fail("mirrors in " + ctx + " must be strings");
    r.mirrors.push_back(m.as_string());
  }
  r.filename = need_string(t, "filename", ctx);
  r.sha256 = need_string(t, "sha256", ctx);
  for (char& c : r.sha256)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (const auto* a = toml::find(t, "archive")) {
    if (!a->is_string()) fail("archive in " + ctx + " must be a string");
    r.archive = parse_archive(a->as_string());
  }
  try {
    r.validate();
  } catch (const Error& e) {
    fail(ctx + " invalid: " + e.what());
  }
  return r;
}

}  // namespace detail_def

inline DatasetDefinition parse_definition(std::string_view text) {
  toml::Table root;
  try {
    root = toml::parse(text);
  } catch (const Error& e) {
    detail_def::fail(std::string("definition is not valid TOML: ") + e.what());
  }

  const std::string name = detail_def::need_string(root, "name", "definition");
  if (name.empty()) detail_def::fail("dataset name must be non-empty");

  std::vector<Resource> resources;
  if (const auto* rs = toml::find(root, "resource")) {
    if (!rs->is_array()) detail_def::fail("'resource' must be [[resource]] tables");
    std::size_t index = 0;
    for (const auto& r : rs->as_array()) {
      if (!r.is_table())
        detail_def::fail("'resource' must be [[resource]] tables");
      resources.push_back(detail_def::parse_resource(r.as_table(), index++));
    }
  }
  if (resources.empty()) detail_def::fail("definition needs at least one [[resource]]");

  FilenamePattern pattern(
      detail_def::need_string(root, "filename_pattern", "definition"));

  const auto* geom = toml::find(root, "geometry");
  if (!geom || !geom->is_table())
    detail_def::fail("missing required table [geometry]");
  ExperimentGeometry geometry = detail_def::parse_geometry(geom->as_table());

  const auto* schema = toml::find(root, "schema");
  if (!schema || !schema->is_table())
    detail_def::fail("missing required table [schema]");
  DatasetSchema parsed_schema = detail_def::parse_schema(schema->as_table());

  return DatasetDefinition{name, std::move(resources), std::move(pattern),
                           geometry, std::move(parsed_schema)};
}

inline std::string serialize_definition(const DatasetDefinition& def) {
  toml::Table root;
  root.emplace("name", def.name);
  root.emplace("filename_pattern", def.filename_pattern.text());

  toml::Array resources;
  for (const Resource& r : def.resources) {
    toml::Table t;
    toml::Array mirrors;
    for (const auto& m : r.mirrors) mirrors.emplace_back(m);
    t.emplace("mirrors", std::move(mirrors));
    t.emplace("filename", r.filename);
    t.emplace("sha256", r.sha256);
    t.emplace("archive", archive_kind_name(r.archive));
    resources.emplace_back(std::move(t));
  }
  root.emplace("resource", std::move(resources));

  toml::Table geom;
  geom.emplace("screen_width_px", def.geometry.screen_width_px);
  geom.emplace("screen_height_px", def.geometry.screen_height_px);
  geom.emplace("screen_width_cm", def.geometry.screen_width_cm);
  geom.emplace("screen_height_cm", def.geometry.screen_height_cm);
  geom.emplace("distance_cm", def.geometry.distance_cm);
  geom.emplace("sampling_rate_hz", def.geometry.sampling_rate_hz);
  geom.emplace("origin", def.geometry.origin == Origin::UpperLeft
                             ? "upper-left"
                             : "center");
  root.emplace("geometry", std::move(geom));

  toml::Table schema;
  if (std::holds_alternative<TrackerDialectSchema>(def.schema)) {
    schema.emplace("kind", "asc");
  } else {
    const CsvSchema& s = std::get<CsvSchema>(def.schema);
    schema.emplace("kind", "csv");
    schema.emplace("separator", std::string(1, s.separator));
    schema.emplace("time", s.time);
    schema.emplace("x_px", s.x_px);
    schema.emplace("y_px", s.y_px);
    if (s.pupil) schema.emplace("pupil", *s.pupil);
    schema.emplace("time_unit",
                   s.time_unit == TimeUnit::Seconds ? "s" : "ms");
    toml::Array markers;
    for (const auto& m : s.missing_markers) markers.emplace_back(m);
    schema.emplace("missing", std::move(markers));
  }
  root.emplace("schema", std::move(schema));
  return toml::serialize(root);
}

}  // namespace gaze
