#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "gaze/dataset/archive.hpp"
#include "test_support.hpp"

using Catch::Matchers::ContainsSubstring;
using gaze::ArchiveKind;
using gaze::Error;
using gaze::ErrorKind;
using gaze::extract_archive;

namespace fs = std::filesystem;

namespace {

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  testsup::write_file(p, std::string(bytes.begin(), bytes.end()));
}

// Runs a python snippet with cwd-independent paths; asserts success.
void run_python(const testsup::TempDir& tmp, const std::string& body) {
  const auto script = tmp.file("helper.py");
  testsup::write_file(script, body);
  const std::string cmd = "python3 " + script.string() + " >" +
                          tmp.file("py.out").string() + " 2>" +
                          tmp.file("py.err").string();
  if (std::system(cmd.c_str()) != 0)
    FAIL("python helper failed: " << testsup::read_file(tmp.file("py.err")));
}

}  // namespace

TEST_CASE("zip writer and extractor round-trip files and subdirectories") {
  gaze::ZipWriter w;
  const std::string binary{"\x00\x01\x02\xff bin", 8};
  w.add("a.txt", "alpha\n");
  w.add("sub/b.bin", binary);
  w.add("empty.txt", "");

  testsup::TempDir tmp;
  write_bytes(tmp.file("r.zip"), w.finish());
  const auto dest = tmp.file("out");
  const auto paths = extract_archive(tmp.file("r.zip"), ArchiveKind::Zip, dest);

  REQUIRE(paths.size() == 3);
  CHECK(paths[0] == dest / "a.txt");
  CHECK(paths[1] == dest / "empty.txt");
  CHECK(paths[2] == dest / "sub" / "b.bin");
  CHECK(testsup::read_file(dest / "a.txt") == "alpha\n");
  CHECK(testsup::read_file(dest / "sub" / "b.bin") == binary);
  CHECK(testsup::read_file(dest / "empty.txt").empty());
}

TEST_CASE("zip writer output is byte-stable") {
  auto build = [] {
    gaze::ZipWriter w;
    w.add("x.csv", "1,2,3\n");
    w.add("y.csv", "4,5,6\n");
    return w.finish();
  };
  CHECK(build() == build());
}

TEST_CASE("python zipfile validates what the writer produces") {
  gaze::ZipWriter w;
  w.add("data/a.txt", "alpha\n");
  w.add("b.txt", "beta\n");

  testsup::TempDir tmp;
  write_bytes(tmp.file("ours.zip"), w.finish());
  run_python(tmp, R"(import zipfile
z = zipfile.ZipFile(r")" + tmp.file("ours.zip").string() + R"(")
assert z.testzip() is None
assert sorted(z.namelist()) == ["b.txt", "data/a.txt"]
assert z.read("data/a.txt") == b"alpha\n"
assert z.read("b.txt") == b"beta\n"
)");
}

TEST_CASE("deflated zips made by python extract correctly") {
  testsup::TempDir tmp;
  // Repetitive content makes deflate actually compress.
  run_python(tmp, R"(import zipfile
with zipfile.ZipFile(r")" + tmp.file("py.zip").string() +
                       R"(", "w", zipfile.ZIP_DEFLATED) as z:
    z.writestr("big.txt", "0123456789" * 5000)
    z.writestr("nested/dir/file.txt", "deep\n")
    z.writestr("folder/", "")
)");

  const auto dest = tmp.file("out");
  const auto paths = extract_archive(tmp.file("py.zip"), ArchiveKind::Zip, dest);
  REQUIRE(paths.size() == 2);
  const auto big = testsup::read_file(dest / "big.txt");
  CHECK(big.size() == 50000);
  CHECK(big.substr(0, 10) == "0123456789");
  CHECK(testsup::read_file(dest / "nested" / "dir" / "file.txt") == "deep\n");
  CHECK(fs::is_directory(dest / "folder"));
}

TEST_CASE("zip entries that escape the destination are refused") {
  const std::vector<std::string> evil_names = {"../evil.txt", "/abs.txt",
                                               "c:\\evil.txt", "..\\up.txt",
                                               "ok/../../out.txt"};
  for (const auto& name : evil_names) {
    CAPTURE(name);
    testsup::TempDir tmp;
    run_python(tmp, R"(import zipfile
with zipfile.ZipFile(r")" + tmp.file("evil.zip").string() + R"(", "w") as z:
    z.writestr(r")" + name + R"(", "gotcha")
)");
    const auto dest = tmp.file("out");
    try {
      extract_archive(tmp.file("evil.zip"), ArchiveKind::Zip, dest);
      FAIL("expected a security error for entry: " << name);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Security);
      CHECK_THAT(e.what(),
                 ContainsSubstring("archive entry escapes destination"));
    }
    CHECK_FALSE(fs::exists(tmp.file("evil.txt")));
    CHECK_FALSE(fs::exists(tmp.file("out.txt")));
  }
}

TEST_CASE("corrupt zip input is an extraction error") {
  testsup::TempDir tmp;

  testsup::write_file(tmp.file("tiny.zip"), "PK");
  CHECK_THROWS_MATCHES(
      extract_archive(tmp.file("tiny.zip"), ArchiveKind::Zip, tmp.file("o1")),
      Error, Catch::Matchers::MessageMatches(ContainsSubstring("too small")));

  testsup::write_file(tmp.file("noise.zip"), std::string(4096, 'q'));
  try {
    extract_archive(tmp.file("noise.zip"), ArchiveKind::Zip, tmp.file("o2"));
    FAIL("expected an extraction error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Extraction);
    CHECK_THAT(e.what(), ContainsSubstring("directory record not found"));
  }
}

TEST_CASE("a flipped payload byte fails the checksum") {
  gaze::ZipWriter w;
  w.add("a.txt", "alpha\n");
  auto bytes = w.finish();

  // Stored entries keep the payload verbatim; corrupt its first byte.
  const std::string needle = "alpha\n";
  auto it = std::search(bytes.begin(), bytes.end(), needle.begin(),
                        needle.end());
  REQUIRE(it != bytes.end());
  *it ^= 0x01;

  testsup::TempDir tmp;
  write_bytes(tmp.file("bad.zip"), bytes);
  try {
    extract_archive(tmp.file("bad.zip"), ArchiveKind::Zip, tmp.file("out"));
    FAIL("expected an extraction error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Extraction);
    CHECK_THAT(e.what(), ContainsSubstring("checksum mismatch: a.txt"));
  }
}

TEST_CASE("tar.gz writer and extractor round-trip") {
  gaze::TarGzWriter w;
  w.add("readme.txt", "hello tar\n");
  w.add("data/values.csv", "1,2\n3,4\n");
  w.add("blank", "");

  testsup::TempDir tmp;
  write_bytes(tmp.file("r.tar.gz"), w.finish());
  const auto dest = tmp.file("out");
  const auto paths =
      extract_archive(tmp.file("r.tar.gz"), ArchiveKind::TarGz, dest);

  REQUIRE(paths.size() == 3);
  CHECK(testsup::read_file(dest / "readme.txt") == "hello tar\n");
  CHECK(testsup::read_file(dest / "data" / "values.csv") == "1,2\n3,4\n");
  CHECK(testsup::read_file(dest / "blank").empty());

  // Same adds, same bytes.
  gaze::TarGzWriter w2;
  w2.add("readme.txt", "hello tar\n");
  w2.add("data/values.csv", "1,2\n3,4\n");
  w2.add("blank", "");
  gaze::TarGzWriter w3;
  w3.add("readme.txt", "hello tar\n");
  w3.add("data/values.csv", "1,2\n3,4\n");
  w3.add("blank", "");
  CHECK(w2.finish() == w3.finish());
}

TEST_CASE("python tarfile reads what the tar writer produces") {
  gaze::TarGzWriter w;
  w.add("a.txt", "alpha\n");
  w.add("sub/b.txt", "beta\n");

  testsup::TempDir tmp;
  write_bytes(tmp.file("ours.tar.gz"), w.finish());
  run_python(tmp, R"(import tarfile
with tarfile.open(r")" + tmp.file("ours.tar.gz").string() + R"(") as t:
    names = sorted(t.getnames())
    assert names == ["a.txt", "sub/b.txt"], names
    assert t.extractfile("a.txt").read() == b"alpha\n"
    assert t.extractfile("sub/b.txt").read() == b"beta\n"
    for m in t.getmembers():
        assert m.mtime == 0
)");
}

TEST_CASE("pax and gnu-longname archives from python extract") {
  testsup::TempDir tmp;
  const std::string long_name = std::string(80, 'n') + "/" +
                                std::string(70, 'm') + ".txt";
  run_python(tmp, R"(import io
import tarfile

# Default (pax) format: regular file, a directory and a symlink.
with tarfile.open(r")" + tmp.file("pax.tar.gz").string() +
                       R"(", "w:gz") as t:
    data = b"pax content\n"
    info = tarfile.TarInfo("file.txt")
    info.size = len(data)
    t.addfile(info, io.BytesIO(data))
    t.addfile(tarfile.TarInfo("adir/"))
    link = tarfile.TarInfo("escape")
    link.type = tarfile.SYMTYPE
    link.linkname = "/etc/passwd"
    t.addfile(link)

# GNU format produces 'L' entries for names beyond 100 bytes.
with tarfile.open(r")" + tmp.file("gnu.tar.gz").string() +
                       R"(", "w:gz", format=tarfile.GNU_FORMAT) as t:
    data = b"long name content\n"
    info = tarfile.TarInfo(r")" + long_name + R"(")
    info.size = len(data)
    t.addfile(info, io.BytesIO(data))
)");

  const auto pax_dest = tmp.file("pax_out");
  const auto pax = extract_archive(tmp.file("pax.tar.gz"),
                                   ArchiveKind::TarGz, pax_dest);
  REQUIRE(pax.size() == 1);
  CHECK(testsup::read_file(pax_dest / "file.txt") == "pax content\n");
  CHECK(fs::is_directory(pax_dest / "adir"));
  // The symlink was skipped, not materialised.
  CHECK(fs::symlink_status(pax_dest / "escape").type() ==
        fs::file_type::not_found);

  const auto gnu_dest = tmp.file("gnu_out");
  const auto gnu = extract_archive(tmp.file("gnu.tar.gz"),
                                   ArchiveKind::TarGz, gnu_dest);
  REQUIRE(gnu.size() == 1);
  CHECK(gnu[0] == gnu_dest / fs::path(long_name));
  CHECK(testsup::read_file(gnu[0]) == "long name content\n");
}

TEST_CASE("tar entries that escape the destination are refused") {
  testsup::TempDir tmp;
  run_python(tmp, R"(import io
import tarfile
with tarfile.open(r")" + tmp.file("evil.tar.gz").string() +
                       R"(", "w:gz") as t:
    data = b"gotcha"
    info = tarfile.TarInfo("../evil.txt")
    info.size = len(data)
    t.addfile(info, io.BytesIO(data))
)");
  try {
    extract_archive(tmp.file("evil.tar.gz"), ArchiveKind::TarGz,
                    tmp.file("out"));
    FAIL("expected a security error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Security);
  }
  CHECK_FALSE(fs::exists(tmp.file("evil.txt")));
}

TEST_CASE("corrupt tar.gz input is an extraction error") {
  testsup::TempDir tmp;
  testsup::write_file(tmp.file("junk.tar.gz"), "certainly not gzip");
  CHECK_THROWS_AS(extract_archive(tmp.file("junk.tar.gz"),
                                  ArchiveKind::TarGz, tmp.file("o")),
                  Error);

  // A header that promises more payload than the archive holds.
  run_python(tmp, R"(import gzip
import tarfile
import io

buf = io.BytesIO()
with tarfile.open(fileobj=buf, mode="w") as t:
    data = b"x" * 2000
    info = tarfile.TarInfo("big.bin")
    info.size = len(data)
    t.addfile(info, io.BytesIO(data))
tar = buf.getvalue()
cut = tar[:512 + 512]  # keep the header, drop most of the payload
with open(r")" + tmp.file("cut.tar.gz").string() + R"(", "wb") as f:
    f.write(gzip.compress(cut))
)");
  try {
    extract_archive(tmp.file("cut.tar.gz"), ArchiveKind::TarGz,
                    tmp.file("o2"));
    FAIL("expected an extraction error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Extraction);
    CHECK_THAT(e.what(), ContainsSubstring("truncated"));
  }
}

TEST_CASE("archive kind none passes the file through untouched") {
  testsup::TempDir tmp;
  testsup::write_file(tmp.file("plain.csv"), "a,b\n1,2\n");
  const auto paths = extract_archive(tmp.file("plain.csv"),
                                     ArchiveKind::None, tmp.file("ignored"));
  REQUIRE(paths.size() == 1);
  CHECK(paths[0] == tmp.file("plain.csv"));
  CHECK_FALSE(fs::exists(tmp.file("ignored")));
}

TEST_CASE("missing archives are io errors") {
  testsup::TempDir tmp;
  try {
    extract_archive(tmp.file("ghost.zip"), ArchiveKind::Zip, tmp.file("o"));
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
    CHECK_THAT(e.what(), ContainsSubstring("does not exist"));
  }
}

TEST_CASE("the writers refuse hostile entry names up front") {
  gaze::ZipWriter z;
  CHECK_THROWS_AS(z.add("../up.txt", "x"), Error);
  gaze::TarGzWriter t;
  CHECK_THROWS_AS(t.add("/abs.txt", "x"), Error);
  CHECK_THROWS_AS(t.add(std::string(150, 'a'), "x"), Error);
}
