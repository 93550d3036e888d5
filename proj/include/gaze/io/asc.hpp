#pragma once

// Parser for the text recording dialect exported by common video-based
// trackers: "**"-prefixed header metadata, MSG lines, monocular sample rows
// (time, x, y, pupil, optional trailing flags) and vendor event lines that
// this toolkit deliberately skips because events are recomputed downstream.

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gaze/core.hpp"
#include "gaze/detail/strings.hpp"
#include "gaze/error.hpp"

namespace gaze {

struct AscMessage {
  double time_ms;
  std::string text;
};

struct AscParseResult {
  GazeFrame gaze;
  std::vector<AscMessage> messages;
  std::map<std::string, std::string> metadata;
  std::size_t unrecognized_count = 0;
  std::vector<std::size_t> unrecognized_lines;  // 1-based, first 20 kept
};

namespace detail_asc {

inline const std::set<std::string_view>& skipped_keywords() {
  static const std::set<std::string_view> kw = {
      "SFIX", "EFIX", "SSACC", "ESACC", "SBLINK", "EBLINK", "START", "END"};
  return kw;
}

inline bool number_like(std::string_view tok) {
  return tok == "." || gaze::detail::parse_double(tok).has_value();
}

[[noreturn]] inline void fail(ErrorKind kind, std::size_t lineno,
                              const std::string& msg) {
  detail::raise(kind, "line " + std::to_string(lineno) + ": " + msg);
}

inline double field_value(std::string_view tok, std::size_t lineno,
                          const char* what) {
  if (tok == ".") return missing;
  if (auto v = gaze::detail::parse_double(tok)) return *v;
  fail(ErrorKind::Parse, lineno,
       std::string("cannot parse ") + what + " field '" + std::string(tok) +
           "'");
}

}  // namespace detail_asc

inline AscParseResult parse_asc(std::string_view text) {
  using gaze::detail::split_ws;
  using gaze::detail::trim;

  GazeFrame::Columns cols;
  cols.pupil.emplace();
  AscParseResult result;
  double last_sample_time = -std::numeric_limits<double>::infinity();
  double last_message_time = -std::numeric_limits<double>::infinity();

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (nl == std::string_view::npos && line.empty()) break;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto stripped = trim(line);
    if (stripped.empty()) continue;

    if (stripped.substr(0, 2) == "**") {
      // "** KEY: value" — preamble lines without a colon are commentary.
      const auto body = trim(stripped.substr(2));
      const auto colon = body.find(':');
      if (colon != std::string_view::npos) {
        const auto key = trim(body.substr(0, colon));
        const auto value = trim(body.substr(colon + 1));
        if (!key.empty())
          result.metadata.emplace(std::string(key), std::string(value));
      }
      continue;
    }

    const auto tokens = split_ws(stripped);
    const std::string_view head = tokens[0];

    if (head == "MSG") {
      if (tokens.size() < 2)
        detail_asc::fail(ErrorKind::Parse, lineno, "MSG line without a time");
      const auto t = gaze::detail::parse_double(tokens[1]);
      if (!t)
        detail_asc::fail(ErrorKind::Parse, lineno,
                         "cannot parse MSG time '" + std::string(tokens[1]) +
                             "'");
      if (*t < last_message_time)
        detail_asc::fail(ErrorKind::Parse, lineno,
                         "MSG time moves backwards");
      last_message_time = *t;
      std::string msg_text;
      for (std::size_t k = 2; k < tokens.size(); ++k) {
        if (k > 2) msg_text += ' ';
        msg_text += std::string(tokens[k]);
      }
      result.messages.push_back({*t, std::move(msg_text)});
      continue;
    }

    if (detail_asc::skipped_keywords().count(head)) continue;

    if (detail_asc::number_like(head) && head != ".") {
      std::size_t numeric = 0;
      while (numeric < tokens.size() && detail_asc::number_like(tokens[numeric]))
        ++numeric;
      if (numeric >= 7)
        detail_asc::fail(ErrorKind::Schema, lineno,
                         "binocular sample layout is not supported");
      if (numeric < 4)
        detail_asc::fail(ErrorKind::Parse, lineno,
                         "sample line has fewer than 4 fields");
      const double t = detail_asc::field_value(tokens[0], lineno, "time");
      if (is_missing(t))
        detail_asc::fail(ErrorKind::Parse, lineno, "sample time is missing");
      if (t <= last_sample_time)
        detail_asc::fail(ErrorKind::Parse, lineno,
                         "non-monotone sample timestamp");
      last_sample_time = t;
      cols.time.push_back(t);
      cols.x_px.push_back(detail_asc::field_value(tokens[1], lineno, "x"));
      cols.y_px.push_back(detail_asc::field_value(tokens[2], lineno, "y"));
      cols.pupil->push_back(
          detail_asc::field_value(tokens[3], lineno, "pupil"));
      continue;
    }

    ++result.unrecognized_count;
    if (result.unrecognized_lines.size() < 20)
      result.unrecognized_lines.push_back(lineno);
  }

  result.gaze = GazeFrame(std::move(cols));
  return result;
}

inline AscParseResult parse_asc_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    detail::raise(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_asc(buf.str());
}

}  // namespace gaze
