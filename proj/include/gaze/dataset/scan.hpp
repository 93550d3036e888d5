#pragma once

// Session discovery and bulk loading: walk a raw directory, match basenames
// against the dataset's filename pattern, and parse every hit with the
// dataset's schema. Loading is partial-failure tolerant — one malformed file
// is recorded, the rest still load.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gaze/core.hpp"
#include "gaze/dataset/definition.hpp"
#include "gaze/io/asc.hpp"
#include "gaze/io/csv.hpp"

namespace gaze {

struct ScannedFile {
  std::filesystem::path path;
  SessionMeta meta;
};

/// Recursively match regular files under raw_dir whose basename matches the
/// definition's filename pattern. Non-matching files are ignored. The result
/// is sorted by path, so it is a pure function of the directory contents.
inline std::vector<ScannedFile> scan_files(const DatasetDefinition& def,
                                           const std::filesystem::path& raw_dir) {
  namespace fs = std::filesystem;
  if (!fs::exists(raw_dir) || !fs::is_directory(raw_dir))
    detail::raise(ErrorKind::Io,
                  "raw directory does not exist: " + raw_dir.string());
  std::vector<ScannedFile> out;
  for (const auto& entry : fs::recursive_directory_iterator(raw_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string basename = entry.path().filename().string();
    if (auto meta = def.filename_pattern.match(basename))
      out.push_back({entry.path(), std::move(*meta)});
  }
  std::sort(out.begin(), out.end(),
            [](const ScannedFile& a, const ScannedFile& b) {
              return a.path < b.path;
            });
  return out;
}

struct LoadedSession {
  std::filesystem::path path;
  SessionMeta meta;
  GazeFrame frame;
};

struct LoadFailure {
  std::filesystem::path path;
  std::string message;
};

struct LoadReport {
  std::vector<LoadedSession> sessions;  // in path order
  std::vector<LoadFailure> failures;    // in path order
  bool all_loaded() const { return failures.empty(); }
};

/// Parse one session file according to the dataset schema.
inline GazeFrame load_session_file(const DatasetDefinition& def,
                                   const std::filesystem::path& path) {
  if (std::holds_alternative<TrackerDialectSchema>(def.schema))
    return parse_asc_file(path).gaze;
  return read_gaze_csv(path, std::get<CsvSchema>(def.schema), def.geometry);
}

/// Load every matched session under raw_dir. Files may be parsed in
/// parallel (jobs > 1); successes and failures are both merged back in
/// deterministic path order. Zero matched files is not an error — the
/// report is simply empty.
inline LoadReport load_dataset(const DatasetDefinition& def,
                               const std::filesystem::path& raw_dir,
                               unsigned jobs = 1) {
  if (jobs == 0)
    detail::raise(ErrorKind::InvalidArgument, "jobs must be >= 1");
  const auto files = scan_files(def, raw_dir);

  struct Slot {
    bool ok = false;
    GazeFrame frame;
    std::string error;
  };
  std::vector<Slot> slots(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= files.size()) return;
      try {
        slots[i].frame = load_session_file(def, files[i].path);
        slots[i].ok = true;
      } catch (const std::exception& e) {
        slots[i].error = e.what();
      }
    }
  };
  const unsigned n =
      static_cast<unsigned>(std::min<std::size_t>(jobs, files.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  LoadReport report;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (slots[i].ok)
      report.sessions.push_back(
          {files[i].path, files[i].meta, std::move(slots[i].frame)});
    else
      report.failures.push_back({files[i].path, std::move(slots[i].error)});
  }
  return report;
}

}  // namespace gaze
