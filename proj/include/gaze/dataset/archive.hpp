#pragma once

// Archive extraction for downloaded dataset resources: stored/deflated zip
// and ustar tar.gz, enough for how public datasets actually ship. Every
// entry name is screened against path traversal before anything touches the
// filesystem. Also provides tiny deterministic zip/tar.gz writers (stored
// entries, fixed timestamps) used for the bundled toy dataset and fixtures.

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gaze/dataset/definition.hpp"
#include "gaze/error.hpp"

namespace gaze {

namespace detail_archive {

[[noreturn]] inline void corrupt(const std::string& msg) {
  detail::raise(ErrorKind::Extraction, msg);
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) detail::raise(ErrorKind::Io, "cannot open archive: " + p.string());
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};
  if (in.bad()) detail::raise(ErrorKind::Io, "read failed: " + p.string());
  return bytes;
}

inline std::uint16_t u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

/// Reject entry names that would write outside the destination: absolute
/// paths, drive-letter-ish prefixes, or any ".." component. Separators may
/// be '/' (the zip standard) or '\\' (produced by some Windows tools).
inline void check_entry_name(const std::string& name) {
  if (name.empty()) corrupt("archive entry with empty name");
  std::string normalized = name;
  for (char& c : normalized)
    if (c == '\\') c = '/';
  if (normalized.front() == '/' ||
      (normalized.size() >= 2 && normalized[1] == ':'))
    detail::raise(ErrorKind::Security,
                  "archive entry escapes destination: " + name);
  std::size_t start = 0;
  while (start <= normalized.size()) {
    const auto end = normalized.find('/', start);
    const auto part = normalized.substr(
        start, end == std::string::npos ? std::string::npos : end - start);
    if (part == "..")
      detail::raise(ErrorKind::Security,
                    "archive entry escapes destination: " + name);
    if (end == std::string::npos) break;
    start = end + 1;
  }
}

inline std::filesystem::path entry_path(const std::filesystem::path& dest,
                                        const std::string& name) {
  check_entry_name(name);
  std::string normalized = name;
  for (char& c : normalized)
    if (c == '\\') c = '/';
  return dest / std::filesystem::path(normalized);
}

inline void write_entry(const std::filesystem::path& p,
                        const unsigned char* data, std::size_t n) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(n));
  out.close();
  if (!out) detail::raise(ErrorKind::Io, "cannot write " + p.string());
}

/// Raw-deflate decompression (zip entries use no zlib/gzip wrapper).
inline std::vector<unsigned char> inflate_raw(const unsigned char* data,
                                              std::size_t n,
                                              std::size_t expected_size) {
  std::vector<unsigned char> out(expected_size);
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) corrupt("inflate initialisation failed");
  zs.next_in = const_cast<Bytef*>(data);
  zs.avail_in = static_cast<uInt>(n);
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected_size)
    corrupt("zip entry fails to decompress");
  return out;
}

/// Whole-buffer gzip decompression with unknown output size.
inline std::vector<unsigned char> gunzip(const std::vector<unsigned char>& in) {
  std::vector<unsigned char> out;
  out.resize(std::max<std::size_t>(in.size() * 4, 1 << 16));
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK)
    corrupt("gzip initialisation failed");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  std::size_t produced = 0;
  for (;;) {
    zs.next_out = out.data() + produced;
    zs.avail_out = static_cast<uInt>(out.size() - produced);
    const int rc = inflate(&zs, Z_NO_FLUSH);
    produced = zs.total_out;
    if (rc == Z_STREAM_END) break;
    if (rc == Z_OK || rc == Z_BUF_ERROR) {
      if (zs.avail_in == 0 && rc == Z_BUF_ERROR) {
        inflateEnd(&zs);
        corrupt("gzip stream is truncated");
      }
      out.resize(out.size() * 2);
      continue;
    }
    inflateEnd(&zs);
    corrupt("gzip stream is corrupt");
  }
  inflateEnd(&zs);
  out.resize(produced);
  return out;
}

inline std::vector<std::filesystem::path> extract_zip(
    const std::filesystem::path& archive, const std::filesystem::path& dest) {
  const auto bytes = read_file(archive);

  // End-of-central-directory record: scan backwards over a possible comment.
  constexpr std::uint32_t kEocdSig = 0x06054b50;
  constexpr std::size_t kEocdLen = 22;
  if (bytes.size() < kEocdLen) corrupt("zip too small for directory record");
  std::size_t eocd = std::string::npos;
  const std::size_t scan_floor =
      bytes.size() > kEocdLen + 65535 ? bytes.size() - kEocdLen - 65535 : 0;
  for (std::size_t i = bytes.size() - kEocdLen + 1; i-- > scan_floor;) {
    if (u32le(&bytes[i]) == kEocdSig) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string::npos) corrupt("zip directory record not found");

  const std::uint16_t entry_count = u16le(&bytes[eocd + 10]);
  const std::uint32_t dir_offset = u32le(&bytes[eocd + 16]);
  if (dir_offset > bytes.size()) corrupt("zip directory offset out of range");

  std::vector<std::filesystem::path> extracted;
  std::size_t pos = dir_offset;
  for (std::uint16_t e = 0; e < entry_count; ++e) {
    if (pos + 46 > bytes.size() || u32le(&bytes[pos]) != 0x02014b50)
      corrupt("zip central directory entry is corrupt");
    const std::uint16_t method = u16le(&bytes[pos + 10]);
    const std::uint32_t crc = u32le(&bytes[pos + 16]);
    const std::uint32_t comp_size = u32le(&bytes[pos + 20]);
    const std::uint32_t uncomp_size = u32le(&bytes[pos + 24]);
    const std::uint16_t name_len = u16le(&bytes[pos + 28]);
    const std::uint16_t extra_len = u16le(&bytes[pos + 30]);
    const std::uint16_t comment_len = u16le(&bytes[pos + 32]);
    const std::uint32_t local_offset = u32le(&bytes[pos + 42]);
    if (pos + 46 + name_len > bytes.size())
      corrupt("zip entry name is truncated");
    const std::string name(reinterpret_cast<const char*>(&bytes[pos + 46]),
                           name_len);
    pos += 46 + name_len + extra_len + comment_len;

    if (!name.empty() && name.back() == '/') {
      std::filesystem::create_directories(entry_path(dest, name));
      continue;
    }

    // Local header sizes may differ from the central ones; trust the
    // central sizes but honour the local name/extra lengths for the data
    // start.
    if (local_offset + 30 > bytes.size() ||
        u32le(&bytes[local_offset]) != 0x04034b50)
      corrupt("zip local header is corrupt");
    const std::uint16_t lname = u16le(&bytes[local_offset + 26]);
    const std::uint16_t lextra = u16le(&bytes[local_offset + 28]);
    const std::size_t data_start = local_offset + 30 + lname + lextra;
    if (data_start + comp_size > bytes.size())
      corrupt("zip entry data is truncated");

    std::vector<unsigned char> content;
    if (method == 0) {
      if (comp_size != uncomp_size) corrupt("stored zip entry size mismatch");
      content.assign(bytes.begin() + static_cast<std::ptrdiff_t>(data_start),
                     bytes.begin() +
                         static_cast<std::ptrdiff_t>(data_start + comp_size));
    } else if (method == 8) {
      content = inflate_raw(&bytes[data_start], comp_size, uncomp_size);
    } else {
      corrupt("unsupported zip compression method " + std::to_string(method));
    }

    const auto actual_crc =
        crc32(0L, content.empty() ? Z_NULL : content.data(),
              static_cast<uInt>(content.size()));
    if (static_cast<std::uint32_t>(actual_crc) != crc)
      corrupt("zip entry checksum mismatch: " + name);

    const auto target = entry_path(dest, name);
    write_entry(target, content.data(), content.size());
    extracted.push_back(target);
  }
  std::sort(extracted.begin(), extracted.end());
  return extracted;
}

inline std::uint64_t parse_octal(const char* field, std::size_t n) {
  std::uint64_t value = 0;
  bool seen = false;
  for (std::size_t i = 0; i < n; ++i) {
    const char c = field[i];
    if (c == '\0') break;
    if (c == ' ') {
      if (seen) break;
      continue;
    }
    if (c < '0' || c > '7') corrupt("tar header has a malformed octal field");
    value = value * 8 + static_cast<std::uint64_t>(c - '0');
    seen = true;
  }
  return value;
}

inline std::vector<std::filesystem::path> extract_tar_gz(
    const std::filesystem::path& archive, const std::filesystem::path& dest) {
  const auto tar = gunzip(read_file(archive));
  std::vector<std::filesystem::path> extracted;
  std::size_t pos = 0;
  std::string pending_long_name;
  while (pos + 512 <= tar.size()) {
    const char* hdr = reinterpret_cast<const char*>(&tar[pos]);
    bool all_zero = true;
    for (std::size_t i = 0; i < 512 && all_zero; ++i)
      all_zero = tar[pos + i] == 0;
    if (all_zero) break;  // end-of-archive marker

    std::string name(hdr, strnlen(hdr, 100));
    const std::uint64_t size = parse_octal(hdr + 124, 12);
    const char type = hdr[156];
    const std::string prefix(hdr + 345, strnlen(hdr + 345, 155));
    if (!prefix.empty()) name = prefix + "/" + name;
    if (!pending_long_name.empty()) {
      name = pending_long_name;
      pending_long_name.clear();
    }

    pos += 512;
    const std::size_t payload = static_cast<std::size_t>(size);
    if (pos + payload > tar.size()) corrupt("tar entry data is truncated");
    const unsigned char* data = &tar[pos];
    pos += (payload + 511) / 512 * 512;

    switch (type) {
      case '0':
      case '\0': {
        // Pre-POSIX archives mark directories as regular entries with a
        // trailing slash; honour that the way GNU tar does.
        if (!name.empty() && name.back() == '/') {
          std::filesystem::create_directories(entry_path(dest, name));
          break;
        }
        const auto target = entry_path(dest, name);
        write_entry(target, data, payload);
        extracted.push_back(target);
        break;
      }
      case '5':
        std::filesystem::create_directories(entry_path(dest, name));
        break;
      case 'L': {  // GNU long name: payload is the next entry's name
        std::string long_name(reinterpret_cast<const char*>(data), payload);
        while (!long_name.empty() && long_name.back() == '\0')
          long_name.pop_back();
        pending_long_name = std::move(long_name);
        break;
      }
      case 'x':
      case 'g':  // pax extended headers carry no file content
        break;
      default:
        // Links and specials are not materialised; symlinks especially can
        // redirect later entries outside dest.
        break;
    }
  }
  std::sort(extracted.begin(), extracted.end());
  return extracted;
}

}  // namespace detail_archive

/// Extract `archive` (of the given kind) under dest_dir and return the
/// extracted file paths, sorted. Kind None returns the input path unchanged.
inline std::vector<std::filesystem::path> extract_archive(
    const std::filesystem::path& archive, ArchiveKind kind,
    const std::filesystem::path& dest_dir) {
  if (kind == ArchiveKind::None) return {archive};
  if (!std::filesystem::exists(archive))
    detail::raise(ErrorKind::Io, "archive does not exist: " + archive.string());
  std::filesystem::create_directories(dest_dir);
  switch (kind) {
    case ArchiveKind::Zip:
      return detail_archive::extract_zip(archive, dest_dir);
    case ArchiveKind::TarGz:
      return detail_archive::extract_tar_gz(archive, dest_dir);
    case ArchiveKind::None:
      break;
  }
  detail::raise(ErrorKind::InvalidArgument, "unknown archive kind");
}

/// Deterministic stored-entry zip writer: fixed DOS timestamp (1980-01-01),
/// no compression, entries in insertion order. Byte-stable output for
/// byte-identical input.
class ZipWriter {
 public:
  void add(const std::string& name, std::string_view content) {
    detail_archive::check_entry_name(name);
    Entry e;
    e.name = name;
    e.offset = static_cast<std::uint32_t>(out_.size());
    e.crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(content.data()),
              static_cast<uInt>(content.size())));
    e.size = static_cast<std::uint32_t>(content.size());

    u32(0x04034b50);
    u16(20);      // version needed
    u16(0);       // flags
    u16(0);       // method: stored
    u16(0);       // DOS time 00:00:00
    u16(0x0021);  // DOS date 1980-01-01
    u32(e.crc);
    u32(e.size);
    u32(e.size);
    u16(static_cast<std::uint16_t>(name.size()));
    u16(0);  // extra length
    raw(name.data(), name.size());
    raw(content.data(), content.size());
    entries_.push_back(std::move(e));
  }

  std::vector<unsigned char> finish() {
    const std::uint32_t dir_offset = static_cast<std::uint32_t>(out_.size());
    for (const Entry& e : entries_) {
      u32(0x02014b50);
      u16(20);  // version made by
      u16(20);  // version needed
      u16(0);
      u16(0);       // method
      u16(0);       // time
      u16(0x0021);  // date
      u32(e.crc);
      u32(e.size);
      u32(e.size);
      u16(static_cast<std::uint16_t>(e.name.size()));
      u16(0);  // extra
      u16(0);  // comment
      u16(0);  // disk
      u16(0);  // internal attrs
      u32(0);  // external attrs
      u32(e.offset);
      raw(e.name.data(), e.name.size());
    }
    const std::uint32_t dir_size =
        static_cast<std::uint32_t>(out_.size()) - dir_offset;
    u32(0x06054b50);
    u16(0);
    u16(0);
    u16(static_cast<std::uint16_t>(entries_.size()));
    u16(static_cast<std::uint16_t>(entries_.size()));
    u32(dir_size);
    u32(dir_offset);
    u16(0);  // comment length
    return std::move(out_);
  }

 private:
  struct Entry {
    std::string name;
    std::uint32_t offset = 0;
    std::uint32_t crc = 0;
    std::uint32_t size = 0;
  };

  void u16(std::uint16_t v) {
    out_.push_back(static_cast<unsigned char>(v & 0xff));
    out_.push_back(static_cast<unsigned char>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      out_.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
  }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    out_.insert(out_.end(), b, b + n);
  }

  std::vector<unsigned char> out_;
  std::vector<Entry> entries_;
};

/// Deterministic ustar tar.gz writer (regular files only, zero mtime).
class TarGzWriter {
 public:
  void add(const std::string& name, std::string_view content) {
    detail_archive::check_entry_name(name);
    if (name.size() > 100)
      detail::raise(ErrorKind::InvalidArgument,
                    "tar entry name longer than 100 bytes: " + name);
    char hdr[512] = {};
    std::memcpy(hdr, name.data(), name.size());
    write_octal(hdr + 100, 8, 0644);
    write_octal(hdr + 108, 8, 0);
    write_octal(hdr + 116, 8, 0);
    write_octal(hdr + 124, 12, content.size());
    write_octal(hdr + 136, 12, 0);  // mtime
    std::memset(hdr + 148, ' ', 8);
    hdr[156] = '0';
    std::memcpy(hdr + 257, "ustar", 6);
    std::memcpy(hdr + 263, "00", 2);
    unsigned checksum = 0;
    for (unsigned char c : hdr) checksum += c;
    write_octal(hdr + 148, 7, checksum);
    hdr[155] = ' ';
    tar_.insert(tar_.end(), hdr, hdr + 512);
    tar_.insert(tar_.end(), content.begin(), content.end());
    const std::size_t pad = (512 - content.size() % 512) % 512;
    tar_.insert(tar_.end(), pad, '\0');
  }

  std::vector<unsigned char> finish() {
    tar_.insert(tar_.end(), 1024, '\0');
    std::vector<unsigned char> gz(compressBound(static_cast<uLong>(
                                      tar_.size())) + 64);
    z_stream zs{};
    if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK)
      detail::raise(ErrorKind::Io, "gzip initialisation failed");
    zs.next_in = reinterpret_cast<Bytef*>(tar_.data());
    zs.avail_in = static_cast<uInt>(tar_.size());
    zs.next_out = gz.data();
    zs.avail_out = static_cast<uInt>(gz.size());
    const int rc = deflate(&zs, Z_FINISH);
    const std::size_t produced = zs.total_out;
    deflateEnd(&zs);
    if (rc != Z_STREAM_END)
      detail::raise(ErrorKind::Io, "gzip compression failed");
    gz.resize(produced);
    return gz;
  }

 private:
  static void write_octal(char* field, std::size_t n, std::uint64_t value) {
    // Conventional layout: zero-padded digits, trailing NUL.
    for (std::size_t i = n - 1; i-- > 0;) {
      field[i] = static_cast<char>('0' + (value & 7));
      value >>= 3;
    }
    field[n - 1] = '\0';
  }

  std::vector<unsigned char> tar_;
};

}  // namespace gaze
