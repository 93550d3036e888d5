#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gaze/core.hpp"
#include "test_support.hpp"

using gaze::Error;
using gaze::ErrorKind;
using gaze::EventList;
using gaze::EventRecord;
using gaze::ExperimentGeometry;
using gaze::GazeFrame;
using gaze::Origin;
using gaze::SessionMeta;

namespace {

ExperimentGeometry toy_geometry() {
  return {1280.0, 1024.0, 38.0, 30.2, 68.0, 1000.0, Origin::UpperLeft};
}

GazeFrame small_frame() {
  GazeFrame::Columns c;
  c.time = {0.0, 1.0, 2.0, 3.0};
  c.x_px = {10.0, 11.0, 12.0, 13.0};
  c.y_px = {20.0, 21.0, 22.0, 23.0};
  return GazeFrame(std::move(c));
}

}  // namespace

TEST_CASE("missing sentinel is NaN and is_missing detects only it") {
  CHECK(std::isnan(gaze::missing));
  CHECK(gaze::is_missing(gaze::missing));
  CHECK(gaze::is_missing(std::nan("0x7")));
  CHECK_FALSE(gaze::is_missing(0.0));
  CHECK_FALSE(gaze::is_missing(std::numeric_limits<double>::infinity()));
  // Propagation through arithmetic.
  CHECK(gaze::is_missing(gaze::missing + 1.0));
  CHECK(gaze::is_missing(gaze::missing * 0.0));
}

TEST_CASE("validate_geometry accepts sane setups") {
  CHECK(gaze::validate_geometry(toy_geometry()).empty());
  CHECK_NOTHROW(gaze::require_valid_geometry(toy_geometry()));
}

TEST_CASE("validate_geometry reports every violation") {
  ExperimentGeometry g = toy_geometry();
  g.screen_width_px = 0.0;
  g.distance_cm = -3.0;
  auto problems = gaze::validate_geometry(g);
  REQUIRE(problems.size() == 2);
  CHECK(problems[0].find("screen_width_px") != std::string::npos);
  CHECK(problems[1].find("distance_cm") != std::string::npos);
  CHECK_THROWS_AS(gaze::require_valid_geometry(g), Error);
  try {
    gaze::require_valid_geometry(g);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("validate_geometry checks each field") {
  const auto base = toy_geometry();
  auto expect_bad = [&](auto mutate, const char* needle) {
    ExperimentGeometry g = base;
    mutate(g);
    auto problems = gaze::validate_geometry(g);
    REQUIRE_FALSE(problems.empty());
    bool found = false;
    for (const auto& p : problems)
      if (p.find(needle) != std::string::npos) found = true;
    CHECK(found);
  };
  expect_bad([](auto& g) { g.screen_width_px = -1.0; }, "screen_width_px");
  expect_bad([](auto& g) { g.screen_height_px = 0.0; }, "screen_height_px");
  expect_bad([](auto& g) { g.screen_width_cm = 0.0; }, "screen_width_cm");
  expect_bad([](auto& g) { g.screen_height_cm = -0.5; }, "screen_height_cm");
  expect_bad([](auto& g) { g.distance_cm = 0.0; }, "distance_cm");
  expect_bad([](auto& g) { g.sampling_rate_hz = 0.0; }, "sampling_rate_hz");
  expect_bad([](auto& g) { g.screen_width_px = gaze::missing; },
             "screen_width_px");
}

TEST_CASE("GazeFrame validates column lengths") {
  GazeFrame::Columns c;
  c.time = {0.0, 1.0};
  c.x_px = {1.0};
  c.y_px = {1.0, 2.0};
  CHECK_THROWS_AS(GazeFrame(std::move(c)), Error);
}

TEST_CASE("GazeFrame requires paired optional columns") {
  GazeFrame::Columns c;
  c.time = {0.0, 1.0};
  c.x_px = {1.0, 2.0};
  c.y_px = {1.0, 2.0};
  c.x_dva = std::vector<double>{0.1, 0.2};
  CHECK_THROWS_AS(GazeFrame(std::move(c)), Error);

  GazeFrame::Columns c2;
  c2.time = {0.0, 1.0};
  c2.x_px = {1.0, 2.0};
  c2.y_px = {1.0, 2.0};
  c2.vy = std::vector<double>{0.1, 0.2};
  CHECK_THROWS_AS(GazeFrame(std::move(c2)), Error);
}

TEST_CASE("GazeFrame requires strictly increasing time") {
  GazeFrame::Columns c;
  c.time = {0.0, 1.0, 1.0};
  c.x_px = {1.0, 2.0, 3.0};
  c.y_px = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(GazeFrame(std::move(c)), Error);

  GazeFrame::Columns c2;
  c2.time = {0.0, 2.0, 1.0};
  c2.x_px = {1.0, 2.0, 3.0};
  c2.y_px = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(GazeFrame(std::move(c2)), Error);
}

TEST_CASE("GazeFrame missing values are fine everywhere but time") {
  GazeFrame::Columns c;
  c.time = {0.0, 1.0, 2.0};
  c.x_px = {1.0, gaze::missing, 3.0};
  c.y_px = {gaze::missing, gaze::missing, 3.0};
  CHECK_NOTHROW(GazeFrame(std::move(c)));

  GazeFrame::Columns c2;
  c2.time = {0.0, gaze::missing, 2.0};
  c2.x_px = {1.0, 2.0, 3.0};
  c2.y_px = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(GazeFrame(std::move(c2)), Error);
}

TEST_CASE("GazeFrame absent column access raises Schema error") {
  auto f = small_frame();
  CHECK_FALSE(f.has_degrees());
  CHECK_FALSE(f.has_velocity());
  CHECK_FALSE(f.has_pupil());
  CHECK_THROWS_AS(f.x_dva(), Error);
  try {
    f.vx();
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Schema);
    CHECK(std::string(e.what()).find("vx") != std::string::npos);
  }
}

TEST_CASE("with_degrees and with_velocity attach columns") {
  auto f = small_frame();
  auto g = f.with_degrees({0.1, 0.2, 0.3, 0.4}, {1.0, 2.0, 3.0, 4.0});
  CHECK_FALSE(f.has_degrees());
  REQUIRE(g.has_degrees());
  CHECK(g.x_dva()[2] == 0.3);
  auto h = g.with_velocity({0.0, 1.0, 2.0, 3.0}, {5.0, 6.0, 7.0, 8.0});
  REQUIRE(h.has_velocity());
  CHECK(h.vy()[1] == 6.0);
  CHECK_THROWS_AS(f.with_degrees({0.1}, {0.2}), Error);
}

TEST_CASE("slice keeps inclusive bounds and all columns") {
  auto f = small_frame().with_degrees({0.1, 0.2, 0.3, 0.4},
                                      {1.0, 2.0, 3.0, 4.0});
  auto s = f.slice(1, 2);
  REQUIRE(s.size() == 2);
  CHECK(s.time()[0] == 1.0);
  CHECK(s.time()[1] == 2.0);
  CHECK(s.x_px()[0] == 11.0);
  CHECK(s.x_dva()[1] == 0.3);
  auto one = f.slice(3, 3);
  CHECK(one.size() == 1);
  CHECK_THROWS_AS(f.slice(2, 1), Error);
  CHECK_THROWS_AS(f.slice(0, 4), Error);
}

TEST_CASE("EventRecord validates its invariants") {
  CHECK_NOTHROW(EventRecord("fixation", 0.0, 10.0, 0, 5));
  CHECK_NOTHROW(EventRecord("fixation", 3.0, 3.0, 2, 2));
  CHECK_THROWS_AS(EventRecord("", 0.0, 1.0, 0, 1), Error);
  CHECK_THROWS_AS(EventRecord("fixation", 2.0, 1.0, 0, 1), Error);
  CHECK_THROWS_AS(EventRecord("fixation", 0.0, 1.0, 2, 1), Error);
}

TEST_CASE("EventRecord with_properties merges") {
  EventRecord e("saccade", 0.0, 5.0, 0, 5);
  auto e2 = e.with_properties({{"duration", 5.0}});
  CHECK(e.properties().empty());
  REQUIRE(e2.properties().count("duration") == 1);
  auto e3 = e2.with_properties({{"amplitude", 1.5}});
  CHECK(e3.properties().size() == 2);
}

TEST_CASE("EventList sorts by onset then offset then name") {
  std::vector<EventRecord> evs;
  evs.emplace_back("saccade", 5.0, 9.0, 5, 9);
  evs.emplace_back("fixation", 0.0, 4.0, 0, 4);
  evs.emplace_back("microsaccade", 5.0, 7.0, 5, 7);
  evs.emplace_back("fixation", 5.0, 7.0, 5, 7);
  EventList list(std::move(evs));
  REQUIRE(list.size() == 4);
  CHECK(list[0].name() == "fixation");
  CHECK(list[0].onset_t() == 0.0);
  CHECK(list[1].onset_t() == 5.0);
  CHECK(list[1].offset_t() == 7.0);
  CHECK(list[1].name() == "fixation");
  CHECK(list[2].name() == "microsaccade");
  CHECK(list[3].name() == "saccade");
}

TEST_CASE("merge_events combines and re-sorts") {
  EventList a({EventRecord("fixation", 0.0, 4.0, 0, 4),
               EventRecord("fixation", 10.0, 14.0, 10, 14)});
  EventList b({EventRecord("saccade", 5.0, 9.0, 5, 9)});
  auto m = gaze::merge_events(a, b);
  REQUIRE(m.size() == 3);
  CHECK(m[0].name() == "fixation");
  CHECK(m[1].name() == "saccade");
  CHECK(m[2].name() == "fixation");
}

TEST_CASE("EventList iteration works with range-for") {
  EventList list({EventRecord("fixation", 0.0, 1.0, 0, 1)});
  std::size_t n = 0;
  for (const auto& e : list) {
    CHECK(e.name() == "fixation");
    ++n;
  }
  CHECK(n == 1);
}

TEST_CASE("SessionMeta id is deterministic and sorted") {
  SessionMeta m({{"subject", "7"}, {"block", "2"}});
  CHECK(m.id() == "block-2_subject-7");
  SessionMeta m2({{"block", "2"}, {"subject", "7"}});
  CHECK(m2.id() == m.id());
  SessionMeta empty;
  CHECK(empty.id() == "session");
  using Items = std::map<std::string, std::string>;
  CHECK_THROWS_AS(SessionMeta(Items{{"", "x"}}), Error);
  CHECK_THROWS_AS(SessionMeta(Items{{"subject", ""}}), Error);
}
