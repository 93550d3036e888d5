#include <catch2/catch_amalgamated.hpp>

#include <cctype>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "gaze/dataset/definition.hpp"
#include "test_support.hpp"

using Catch::Matchers::ContainsSubstring;
using gaze::ArchiveKind;
using gaze::DatasetDefinition;
using gaze::Error;
using gaze::ErrorKind;
using gaze::FilenamePattern;
using gaze::Resource;
using gaze::parse_definition;
using gaze::serialize_definition;

namespace {

// A small but complete definition; tests mutate pieces of it.
std::string base_definition() {
  return R"(name = "demo"
filename_pattern = 'trial_(?P<subject>[0-9]+)\.csv'

[[resource]]
mirrors = ["https://one.example/demo.zip", "https://two.example/demo.zip"]
filename = "demo.zip"
sha256 = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
archive = "zip"

[geometry]
screen_width_px = 1280.0
screen_height_px = 1024.0
screen_width_cm = 38.0
screen_height_cm = 30.2
distance_cm = 68.0
sampling_rate_hz = 1000.0
origin = "upper-left"

[schema]
kind = "csv"
time = "time"
x_px = "x"
y_px = "y"
pupil = "pupil"
time_unit = "ms"
missing = ["."]
)";
}

void expect_definition_error(const std::string& text,
                             const std::string& fragment) {
  try {
    parse_definition(text);
    FAIL("expected a definition error for fragment: " + fragment);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Definition);
    CHECK_THAT(e.what(), ContainsSubstring(fragment));
  }
}

std::string drop_line(const std::string& text, const std::string& prefix) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    if (line.rfind(prefix, 0) != 0) out += line + "\n";
    pos = nl + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("python-style named groups are found and matched") {
  FilenamePattern p("trial_(?P<subject>[0-9]+)\\.csv");
  REQUIRE(p.group_names() == std::vector<std::string>{"subject"});

  const auto meta = p.match("trial_42.csv");
  REQUIRE(meta.has_value());
  CHECK(meta->at("subject") == "42");

  // The whole basename must match, and the dot is escaped, not a wildcard.
  CHECK_FALSE(p.match("xtrial_42.csv").has_value());
  CHECK_FALSE(p.match("trial_42.csvx").has_value());
  CHECK_FALSE(p.match("trial_42Xcsv").has_value());
}

TEST_CASE("native named groups work and keep appearance order") {
  FilenamePattern p("(?<run>[a-z]+)_(?<block>[0-9]+)");
  CHECK(p.group_names() == std::vector<std::string>{"run", "block"});
  const auto meta = p.match("walk_3");
  REQUIRE(meta.has_value());
  CHECK(meta->at("run") == "walk");
  CHECK(meta->at("block") == "3");
}

TEST_CASE("lookbehinds are not mistaken for named groups") {
  FilenamePattern p("ab(?<=b)(?P<tail>c+)");
  CHECK(p.group_names() == std::vector<std::string>{"tail"});
  const auto meta = p.match("abccc");
  REQUIRE(meta.has_value());
  CHECK(meta->at("tail") == "ccc");

  FilenamePattern neg("a(?<!x)(?P<rest>b+)");
  CHECK(neg.group_names() == std::vector<std::string>{"rest"});
  CHECK(neg.match("abb").has_value());
}

TEST_CASE("group syntax inside a character class is ignored") {
  FilenamePattern p("[(?<]x(?P<k>y)");
  CHECK(p.group_names() == std::vector<std::string>{"k"});
  const auto meta = p.match("(xy");
  REQUIRE(meta.has_value());
  CHECK(meta->at("k") == "y");
}

TEST_CASE("escaped parentheses do not open groups") {
  FilenamePattern p("\\(?P<not_a_group\\.(?P<real>x)");
  CHECK(p.group_names() == std::vector<std::string>{"real"});
}

TEST_CASE("groups that match nothing are left out of the metadata") {
  FilenamePattern p("(?P<num>[0-9]*)x");
  const auto meta = p.match("x");
  REQUIRE(meta.has_value());
  CHECK_FALSE(meta->contains("num"));
  CHECK(meta->id() == "session");

  const auto meta2 = p.match("7x");
  REQUIRE(meta2.has_value());
  CHECK(meta2->at("num") == "7");
}

TEST_CASE("bad patterns are rejected with a definition error") {
  auto expect = [](const char* pattern, const char* fragment) {
    try {
      FilenamePattern p(pattern);
      FAIL("expected a definition error for pattern: " << pattern);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Definition);
      CHECK_THAT(e.what(), ContainsSubstring(fragment));
    }
  };
  expect("(?P<2bad>x)", "not a valid session key");
  expect("(?P<has space>x)", "not a valid session key");
  expect("(?P<broken", "unterminated group name");
  expect("(?P<a>[", "does not compile");
}

TEST_CASE("resource validation pins its diagnostics") {
  Resource r;
  r.filename = "f.zip";
  r.sha256 = std::string(64, 'a');
  CHECK_THROWS_WITH(r.validate(),
                    ContainsSubstring("resource needs at least 1 mirror"));
  r.mirrors = {"https://host/f.zip"};
  CHECK_NOTHROW(r.validate());

  r.filename = "sub/f.zip";
  CHECK_THROWS_WITH(r.validate(),
                    ContainsSubstring("filename must be a plain name"));
  r.filename = "f.zip";

  r.sha256 = std::string(63, 'a');
  CHECK_THROWS_WITH(r.validate(), ContainsSubstring("need 64 hex digits"));
  r.sha256 = std::string(63, 'a') + "g";
  CHECK_THROWS_WITH(r.validate(), ContainsSubstring("non-hex character"));
}

TEST_CASE("a complete definition parses into typed fields") {
  const auto def = parse_definition(base_definition());
  CHECK(def.name == "demo");
  REQUIRE(def.resources.size() == 1);
  const auto& r = def.resources[0];
  CHECK(r.mirrors.size() == 2);
  CHECK(r.mirrors[0] == "https://one.example/demo.zip");
  CHECK(r.filename == "demo.zip");
  CHECK(r.archive == ArchiveKind::Zip);
  CHECK(def.filename_pattern.group_names() ==
        std::vector<std::string>{"subject"});
  CHECK(def.geometry.screen_width_px == 1280.0);
  CHECK(def.geometry.distance_cm == 68.0);
  CHECK(def.geometry.origin == gaze::Origin::UpperLeft);

  REQUIRE(std::holds_alternative<gaze::CsvSchema>(def.schema));
  const auto& s = std::get<gaze::CsvSchema>(def.schema);
  CHECK(s.time == "time");
  CHECK(s.x_px == "x");
  CHECK(s.pupil == "pupil");
  CHECK(s.missing_markers == std::set<std::string>{"."});
}

TEST_CASE("uppercase digests are normalized to lowercase") {
  auto text = base_definition();
  const std::string lower =
      "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";
  std::string upper = lower;
  for (char& c : upper) c = static_cast<char>(std::toupper(c));
  text.replace(text.find(lower), lower.size(), upper);
  CHECK(parse_definition(text).resources[0].sha256 == lower);
}

TEST_CASE("the asc schema kind needs no column mapping") {
  auto text = base_definition();
  const auto pos = text.find("[schema]");
  text = text.substr(0, pos) + "[schema]\nkind = \"asc\"\n";
  const auto def = parse_definition(text);
  CHECK(std::holds_alternative<gaze::TrackerDialectSchema>(def.schema));
}

TEST_CASE("seconds-based time units are honored") {
  auto text = base_definition();
  const auto pos = text.find("time_unit = \"ms\"");
  text.replace(pos, 16, "time_unit = \"s\"");
  const auto def = parse_definition(text);
  CHECK(std::get<gaze::CsvSchema>(def.schema).time_unit ==
        gaze::TimeUnit::Seconds);
}

TEST_CASE("missing pieces are reported by name") {
  expect_definition_error(drop_line(base_definition(), "name ="),
                          "missing required key 'name'");
  expect_definition_error(drop_line(base_definition(), "sha256 ="),
                          "missing required key 'sha256' in [[resource]] #1");
  expect_definition_error(drop_line(base_definition(), "filename_pattern"),
                          "missing required key 'filename_pattern'");

  auto no_geom = base_definition();
  no_geom.replace(no_geom.find("[geometry]"), 10, "[geometryx]");
  expect_definition_error(no_geom, "missing required table [geometry]");

  auto no_schema = base_definition();
  no_schema.replace(no_schema.find("[schema]"), 8, "[schemax]");
  expect_definition_error(no_schema, "missing required table [schema]");

  auto no_res = base_definition();
  no_res.replace(no_res.find("[[resource]]"), 12, "[[resourcex]]");
  expect_definition_error(no_res, "needs at least one [[resource]]");

  expect_definition_error("name = \"\"\n", "dataset name must be non-empty");
  expect_definition_error("name = 3\n", "must be a string");
  expect_definition_error("not toml [", "definition is not valid TOML");
}

TEST_CASE("field values are checked, not just presence") {
  auto bad_origin = base_definition();
  bad_origin.replace(bad_origin.find("\"upper-left\""), 12, "\"top-left\"");
  expect_definition_error(bad_origin, "origin must be 'upper-left' or 'center'");

  auto bad_archive = base_definition();
  bad_archive.replace(bad_archive.find("\"zip\""), 5, "\"rar\"");
  expect_definition_error(bad_archive, "archive must be 'none', 'zip' or 'tar-gz'");

  auto bad_geometry = base_definition();
  bad_geometry.replace(bad_geometry.find("distance_cm = 68.0"), 18,
                       "distance_cm = -1.0");
  expect_definition_error(bad_geometry, "[geometry] invalid");

  auto bad_kind = base_definition();
  bad_kind.replace(bad_kind.find("kind = \"csv\""), 12, "kind = \"tsv\"");
  expect_definition_error(bad_kind, "schema kind must be 'csv' or 'asc'");
}

TEST_CASE("serialize and parse are mutually inverse") {
  const auto def = parse_definition(base_definition());
  const auto text = serialize_definition(def);
  const auto back = parse_definition(text);
  CHECK(serialize_definition(back) == text);

  CHECK(back.name == def.name);
  CHECK(back.filename_pattern.text() == def.filename_pattern.text());
  CHECK(back.resources[0].sha256 == def.resources[0].sha256);
  CHECK(back.resources[0].mirrors == def.resources[0].mirrors);
  CHECK(back.geometry.screen_height_cm == def.geometry.screen_height_cm);
  CHECK(std::get<gaze::CsvSchema>(back.schema).missing_markers ==
        std::get<gaze::CsvSchema>(def.schema).missing_markers);
}

TEST_CASE("an asc definition also survives the round trip") {
  auto text = base_definition();
  const auto pos = text.find("[schema]");
  text = text.substr(0, pos) + "[schema]\nkind = \"asc\"\n";
  const auto def = parse_definition(text);
  const auto serialized = serialize_definition(def);
  const auto back = parse_definition(serialized);
  CHECK(std::holds_alternative<gaze::TrackerDialectSchema>(back.schema));
  CHECK(serialize_definition(back) == serialized);
}
