#pragma once

// Schema-configured CSV reading plus canonical CSV writers. Files are plain
// separated text without quoting: gaze tables are numeric and event names
// never contain separators. Floats serialize with the shortest digits that
// round-trip, missing values as empty fields, line endings are LF.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gaze/core.hpp"
#include "gaze/detail/strings.hpp"
#include "gaze/error.hpp"

namespace gaze {

enum class TimeUnit { Milliseconds, Seconds };

struct CsvSchema {
  char separator = ',';
  std::string time = "time";
  std::string x_px = "x_px";
  std::string y_px = "y_px";
  std::optional<std::string> pupil;
  TimeUnit time_unit = TimeUnit::Milliseconds;
  std::set<std::string> missing_markers = {".", "NaN", ""};

  void validate() const {
    std::vector<std::string> names = {time, x_px, y_px};
    if (pupil) names.push_back(*pupil);
    for (const auto& n : names)
      if (n.empty())
        detail::raise(ErrorKind::InvalidArgument,
                      "schema column names must be non-empty");
    std::set<std::string> unique(names.begin(), names.end());
    if (unique.size() != names.size())
      detail::raise(ErrorKind::InvalidArgument,
                    "schema column names must be distinct");
    if (separator == '"' || separator == '\'' || separator == '\n')
      detail::raise(ErrorKind::InvalidArgument, "invalid separator");
  }
};

namespace detail_csv {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) detail::raise(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

[[noreturn]] inline void fail_line(std::size_t lineno, const std::string& m) {
  detail::raise(ErrorKind::Parse,
                "line " + std::to_string(lineno) + ": " + m);
}

}  // namespace detail_csv

/// Reads a gaze table. The four core columns come from the schema mapping;
/// derived columns written by write_gaze_csv (x_dva, y_dva, vx, vy) are
/// picked up by their canonical names when present, making write→read
/// lossless.
inline GazeFrame read_gaze_csv(const std::filesystem::path& path,
                               const CsvSchema& schema) {
  schema.validate();
  const std::string text = detail_csv::read_file(path);

  std::size_t lineno = 0;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    line = std::string_view(text).substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++lineno;
    return true;
  };

  std::string_view header;
  if (!next_line(header))
    detail::raise(ErrorKind::Parse, path.string() + ": empty file");
  const auto header_fields = gaze::detail::split(header, schema.separator);

  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t k = 0; k < header_fields.size(); ++k)
      if (gaze::detail::trim(header_fields[k]) == name) return k;
    return std::nullopt;
  };
  auto required = [&](const std::string& name, const char* role) {
    if (auto k = column_of(name)) return *k;
    detail::raise(ErrorKind::Schema, std::string(role) + " column '" + name +
                                         "' not found");
  };

  const std::size_t it = required(schema.time, "time");
  const std::size_t ix = required(schema.x_px, "x_px");
  const std::size_t iy = required(schema.y_px, "y_px");
  std::optional<std::size_t> ip, ixd, iyd, ivx, ivy;
  if (schema.pupil) {
    if (auto k = column_of(*schema.pupil))
      ip = k;
    else
      detail::raise(ErrorKind::Schema,
                    "pupil column '" + *schema.pupil + "' not found");
  }
  ixd = column_of("x_dva");
  iyd = column_of("y_dva");
  ivx = column_of("vx");
  ivy = column_of("vy");
  if (ixd.has_value() != iyd.has_value()) ixd = iyd = std::nullopt;
  if (ivx.has_value() != ivy.has_value()) ivx = ivy = std::nullopt;

  GazeFrame::Columns cols;
  if (ip) cols.pupil.emplace();
  if (ixd) {
    cols.x_dva.emplace();
    cols.y_dva.emplace();
  }
  if (ivx) {
    cols.vx.emplace();
    cols.vy.emplace();
  }

  auto cell = [&](const std::vector<std::string_view>& fields,
                  std::size_t k, const char* what) -> double {
    const auto raw = fields[k];
    if (schema.missing_markers.count(std::string(gaze::detail::trim(raw))))
      return missing;
    if (auto v = gaze::detail::parse_double(raw)) return *v;
    detail_csv::fail_line(lineno, std::string("cannot parse ") + what +
                                      " value '" + std::string(raw) + "'");
  };

  std::string_view line;
  while (next_line(line)) {
    if (gaze::detail::trim(line).empty()) continue;
    const auto fields = gaze::detail::split(line, schema.separator);
    if (fields.size() != header_fields.size())
      detail_csv::fail_line(lineno,
                            "expected " + std::to_string(header_fields.size()) +
                                " fields, got " +
                                std::to_string(fields.size()));
    double t = cell(fields, it, "time");
    if (is_missing(t)) detail_csv::fail_line(lineno, "time value is missing");
    if (schema.time_unit == TimeUnit::Seconds) t *= 1000.0;
    cols.time.push_back(t);
    cols.x_px.push_back(cell(fields, ix, "x_px"));
    cols.y_px.push_back(cell(fields, iy, "y_px"));
    if (ip) cols.pupil->push_back(cell(fields, *ip, "pupil"));
    if (ixd) {
      cols.x_dva->push_back(cell(fields, *ixd, "x_dva"));
      cols.y_dva->push_back(cell(fields, *iyd, "y_dva"));
    }
    if (ivx) {
      cols.vx->push_back(cell(fields, *ivx, "vx"));
      cols.vy->push_back(cell(fields, *ivy, "vy"));
    }
  }

  try {
    return GazeFrame(std::move(cols));
  } catch (const Error& e) {
    detail::raise(e.kind(), path.string() + ": " + e.what());
  }
}

/// Dataset loading pairs every schema with a geometry; this overload
/// validates the pair up front. Parsing itself is geometry-independent.
inline GazeFrame read_gaze_csv(const std::filesystem::path& path,
                               const CsvSchema& schema,
                               const ExperimentGeometry& geometry) {
  require_valid_geometry(geometry);
  return read_gaze_csv(path, schema);
}

namespace detail_csv {

inline void write_text(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    detail::raise(ErrorKind::Io,
                  "cannot open " + path.string() + " for writing");
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  os.flush();
  if (!os) detail::raise(ErrorKind::Io, "failed writing " + path.string());
}

inline void append_value(std::string& out, double v) {
  if (!is_missing(v)) out += gaze::detail::format_double(v);
}

}  // namespace detail_csv

inline std::string encode_gaze_csv(const GazeFrame& f) {
  std::string out = "time,x_px,y_px";
  if (f.has_degrees()) out += ",x_dva,y_dva";
  if (f.has_velocity()) out += ",vx,vy";
  if (f.has_pupil()) out += ",pupil";
  out += '\n';
  for (std::size_t i = 0; i < f.size(); ++i) {
    detail_csv::append_value(out, f.time()[i]);
    out += ',';
    detail_csv::append_value(out, f.x_px()[i]);
    out += ',';
    detail_csv::append_value(out, f.y_px()[i]);
    if (f.has_degrees()) {
      out += ',';
      detail_csv::append_value(out, f.x_dva()[i]);
      out += ',';
      detail_csv::append_value(out, f.y_dva()[i]);
    }
    if (f.has_velocity()) {
      out += ',';
      detail_csv::append_value(out, f.vx()[i]);
      out += ',';
      detail_csv::append_value(out, f.vy()[i]);
    }
    if (f.has_pupil()) {
      out += ',';
      detail_csv::append_value(out, f.pupil()[i]);
    }
    out += '\n';
  }
  return out;
}

inline void write_gaze_csv(const GazeFrame& f,
                           const std::filesystem::path& path) {
  detail_csv::write_text(path, encode_gaze_csv(f));
}

inline std::string encode_events_csv(const EventList& events) {
  std::set<std::string> property_names;
  for (const auto& e : events)
    for (const auto& [key, value] : e.properties()) property_names.insert(key);

  std::string out = "name,onset_t,offset_t,onset_i,offset_i";
  for (const auto& p : property_names) {
    out += ',';
    out += p;
  }
  out += '\n';
  for (const auto& e : events) {
    out += e.name();
    out += ',';
    out += gaze::detail::format_double(e.onset_t());
    out += ',';
    out += gaze::detail::format_double(e.offset_t());
    out += ',';
    out += std::to_string(e.onset_i());
    out += ',';
    out += std::to_string(e.offset_i());
    for (const auto& p : property_names) {
      out += ',';
      auto it = e.properties().find(p);
      if (it != e.properties().end())
        detail_csv::append_value(out, it->second);
    }
    out += '\n';
  }
  return out;
}

inline void write_events_csv(const EventList& events,
                             const std::filesystem::path& path) {
  detail_csv::write_text(path, encode_events_csv(events));
}

/// Schema describing the files write_gaze_csv produces.
inline CsvSchema canonical_csv_schema(bool with_pupil) {
  CsvSchema s;
  if (with_pupil) s.pupil = "pupil";
  return s;
}

}  // namespace gaze
