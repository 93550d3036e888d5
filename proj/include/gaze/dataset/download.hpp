#pragma once

// Mirrored resource downloads with digest verification. The protocol keeps
// the final path trustworthy: bytes land in a per-attempt temp file that is
// renamed onto the final name only after its SHA-256 matches, so a partial
// or corrupted transfer is never observable where consumers look. A file
// already present with the right digest short-circuits before any socket is
// opened.

// Follow at most 5 redirects per request.
#define CPPHTTPLIB_REDIRECT_MAX_COUNT 5
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gaze/dataset/definition.hpp"
#include "gaze/error.hpp"

namespace gaze {

namespace detail_net {

inline std::string to_hex(const unsigned char* bytes, std::size_t n) {
  static const char digits[] = "0123456789abcdef";
  std::string out(2 * n, '0');
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = digits[bytes[i] >> 4];
    out[2 * i + 1] = digits[bytes[i] & 0xf];
  }
  return out;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      detail::raise(ErrorKind::Io, "cannot initialise SHA-256 digest");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1)
      detail::raise(ErrorKind::Io, "SHA-256 update failed");
  }

  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md, &len) != 1)
      detail::raise(ErrorKind::Io, "SHA-256 finalisation failed");
    return to_hex(md, len);
  }

 private:
  EVP_MD_CTX* ctx_;
};

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // /path?query ("/" when absent)
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    detail::raise(ErrorKind::Download, "URL has no scheme: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    detail::raise(ErrorKind::Download, "unsupported URL scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::string unique_part_suffix() {
  static std::atomic<unsigned> counter{0};
  return ".part-" + std::to_string(counter.fetch_add(1)) + "-" +
         std::to_string(static_cast<unsigned long long>(
             std::hash<std::thread::id>{}(std::this_thread::get_id())) %
             100000);
}

}  // namespace detail_net

/// Hex SHA-256 of an in-memory byte range.
inline std::string sha256_hex(const void* data, std::size_t n) {
  detail_net::Sha256 d;
  d.update(data, n);
  return d.hex();
}

inline std::string sha256_hex(const std::vector<unsigned char>& bytes) {
  return sha256_hex(bytes.data(), bytes.size());
}

inline std::string sha256_hex(std::string_view bytes) {
  return sha256_hex(bytes.data(), bytes.size());
}

/// Streaming hex SHA-256 of a file on disk.
inline std::string sha256_hex_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    detail::raise(ErrorKind::Io, "cannot open file: " + path.string());
  detail_net::Sha256 d;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    d.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  if (in.bad())
    detail::raise(ErrorKind::Io, "read failed: " + path.string());
  return d.hex();
}

struct DownloadResult {
  std::filesystem::path path;
  bool from_cache = false;  // true when no network request was made
};

/// Optional source of resource bytes that bypasses the network, used for
/// datasets bundled with the library. Returns nullopt when it cannot supply
/// the named resource. Supplied bytes still pass digest verification.
using BundledBytes = std::function<
    std::optional<std::vector<unsigned char>>(const Resource&)>;

/// Fetch one resource into dest_dir/<filename>, trying mirrors strictly in
/// order. Transport failures (connect error, HTTP status) fail over to the
/// next mirror; a completed transfer whose digest disagrees does not — that
/// is an integrity error and the bytes are discarded.
inline DownloadResult download_resource(const Resource& r,
                                        const std::filesystem::path& dest_dir,
                                        const BundledBytes& bundled = {}) {
  namespace fs = std::filesystem;
  r.validate();
  fs::create_directories(dest_dir);
  const fs::path final_path = dest_dir / r.filename;

  std::string expected = r.sha256;
  for (char& c : expected)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  if (fs::exists(final_path) && sha256_hex_file(final_path) == expected)
    return {final_path, true};

  const fs::path tmp =
      dest_dir / (r.filename + detail_net::unique_part_suffix());
  struct TmpGuard {
    fs::path p;
    ~TmpGuard() {
      std::error_code ec;
      fs::remove(p, ec);
    }
  } guard{tmp};

  auto verify_and_commit = [&](const char* origin) -> DownloadResult {
    const std::string actual = sha256_hex_file(tmp);
    if (actual != expected) {
      std::error_code ec;
      fs::remove(tmp, ec);
      detail::raise(ErrorKind::Integrity,
                    "digest mismatch for " + r.filename + " from " + origin +
                        ": expected " + expected + ", got " + actual);
    }
    fs::rename(tmp, final_path);
    return {final_path, false};
  };

  if (bundled) {
    if (auto bytes = bundled(r)) {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(reinterpret_cast<const char*>(bytes->data()),
                static_cast<std::streamsize>(bytes->size()));
      out.close();
      if (!out)
        detail::raise(ErrorKind::Io, "cannot write " + tmp.string());
      return verify_and_commit("bundled data");
    }
  }

  std::vector<std::string> causes;
  for (const std::string& mirror : r.mirrors) {
    detail_net::SplitUrl url;
    try {
      url = detail_net::split_url(mirror);
    } catch (const Error& e) {
      causes.push_back(e.what());
      continue;
    }

    httplib::Client client(url.base);
    client.set_follow_location(true);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(60, 0);

    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      detail::raise(ErrorKind::Io, "cannot write " + tmp.string());
    auto res = client.Get(url.path, [&](const char* data, size_t len) {
      out.write(data, static_cast<std::streamsize>(len));
      return out.good();
    });
    out.close();

    if (!res) {
      causes.push_back(mirror + ": " + httplib::to_string(res.error()));
      continue;
    }
    if (res->status != 200) {
      causes.push_back(mirror + ": HTTP " + std::to_string(res->status));
      continue;
    }
    return verify_and_commit(mirror.c_str());
  }

  std::string detail_msg;
  for (std::size_t i = 0; i < causes.size(); ++i) {
    if (i) detail_msg += "; ";
    detail_msg += causes[i];
  }
  detail::raise(ErrorKind::Download,
                "all mirrors failed for " + r.filename + ": " + detail_msg);
}

/// Download several resources with bounded concurrency (mirrors within one
/// resource stay strictly ordered). Results are returned in resource order;
/// the first failure (again in resource order) is rethrown after all workers
/// finish.
inline std::vector<DownloadResult> download_resources(
    const std::vector<Resource>& resources,
    const std::filesystem::path& dest_dir, unsigned jobs = 4,
    const BundledBytes& bundled = {}) {
  if (jobs == 0)
    detail::raise(ErrorKind::InvalidArgument, "jobs must be >= 1");
  std::vector<DownloadResult> results(resources.size());
  std::vector<std::exception_ptr> errors(resources.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= resources.size()) return;
      try {
        results[i] = download_resource(resources[i], dest_dir, bundled);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n =
      static_cast<unsigned>(std::min<std::size_t>(jobs, resources.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace gaze
