#pragma once

// Name → dataset definition lookup, plus the end-to-end "make this dataset
// usable" operation: download (or materialise bundled bytes), verify,
// extract into dest_dir/{downloads,raw}. The built-in registry ships the
// generated toy dataset; additional definitions load from TOML files.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "gaze/dataset/archive.hpp"
#include "gaze/dataset/definition.hpp"
#include "gaze/dataset/download.hpp"
#include "gaze/dataset/toy.hpp"

namespace gaze {

struct EnsureReport {
  std::filesystem::path raw_dir;
  std::vector<DownloadResult> downloads;      // in resource order
  std::vector<std::filesystem::path> files;   // raw files, sorted per resource
  bool fully_cached() const {
    for (const auto& d : downloads)
      if (!d.from_cache) return false;
    return true;
  }
};

/// Fetch + verify + extract every resource of `def` under dest_dir. Archives
/// unpack into raw/; plain resources are copied there so the raw tree always
/// holds everything scan_files should see.
inline EnsureReport ensure_dataset(const DatasetDefinition& def,
                                   const std::filesystem::path& dest_dir,
                                   unsigned jobs = 4,
                                   const BundledBytes& bundled = {}) {
  namespace fs = std::filesystem;
  EnsureReport report;
  const fs::path downloads_dir = dest_dir / "downloads";
  report.raw_dir = dest_dir / "raw";
  report.downloads =
      download_resources(def.resources, downloads_dir, jobs, bundled);
  fs::create_directories(report.raw_dir);
  for (std::size_t i = 0; i < def.resources.size(); ++i) {
    const Resource& r = def.resources[i];
    if (r.archive == ArchiveKind::None) {
      const fs::path target = report.raw_dir / r.filename;
      fs::copy_file(report.downloads[i].path, target,
                    fs::copy_options::overwrite_existing);
      report.files.push_back(target);
    } else {
      auto extracted =
          extract_archive(report.downloads[i].path, r.archive, report.raw_dir);
      report.files.insert(report.files.end(), extracted.begin(),
                          extracted.end());
    }
  }
  return report;
}

class Registry {
 public:
  struct Entry {
    DatasetDefinition def;
    BundledBytes bundled;  // empty for ordinary (network) datasets
  };

  /// Registry preloaded with the bundled datasets.
  static Registry with_builtin() {
    Registry r;
    r.add(toy::definition(), [](const Resource& res)
              -> std::optional<std::vector<unsigned char>> {
      if (res.filename == "toy_sessions.zip") return toy::archive_bytes();
      return std::nullopt;
    });
    return r;
  }

  void add(DatasetDefinition def, BundledBytes bundled = {}) {
    const std::string name = def.name;
    if (entries_.contains(name))
      detail::raise(ErrorKind::InvalidArgument,
                    "dataset already registered: " + name);
    entries_.emplace(name, Entry{std::move(def), std::move(bundled)});
  }

  void add_definition_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      detail::raise(ErrorKind::Io,
                    "cannot open definition: " + path.string());
    std::string text{std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>()};
    try {
      add(parse_definition(text));
    } catch (const Error& e) {
      detail::raise(e.kind(), path.string() + ": " + e.what());
    }
  }

  /// Load every *.toml under dir (sorted, non-recursive). Missing dir is
  /// fine — a fresh data home simply has no extra definitions yet.
  void add_definitions_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::exists(dir)) return;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".toml")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) add_definition_file(f);
  }

  bool contains(const std::string& name) const {
    return entries_.contains(name);
  }

  const Entry& get(const std::string& name) const {
    const auto it = entries_.find(name);
    if (it == entries_.end())
      detail::raise(ErrorKind::InvalidArgument, "unknown dataset: " + name);
    return it->second;
  }

  /// Registered names, sorted (std::map order).
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, entry] : entries_) out.push_back(name);
    return out;
  }

  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace gaze
