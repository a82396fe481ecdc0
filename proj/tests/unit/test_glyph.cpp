#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dronelight/error.hpp"
#include "dronelight/glyph.hpp"

using namespace dronelight;

namespace {

std::size_t lit_count(const LetterPath& p) {
  std::size_t n = 0;
  for (const auto& s : p.setpoints) n += s.lit ? 1 : 0;
  return n;
}

double dist(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

}  // namespace

TEST_SUITE("glyph") {

TEST_CASE("built-in glyph shapes") {
  const auto& o = glyph_table(Label::O);
  REQUIRE(o.strokes.size() == 1);
  CHECK(o.strokes[0].front() == o.strokes[0].back());
  CHECK(o.strokes[0].size() == 17);

  const auto& l = glyph_table(Label::L);
  REQUIRE(l.strokes.size() == 1);
  CHECK(l.strokes[0].size() == 3);

  CHECK(glyph_table(Label::K).strokes.size() == 2);
  CHECK(glyph_table(Label::J).strokes[0].size() == 4);
  CHECK(glyph_table(Label::S).strokes[0].size() == 8);

  for (Label label : kAllLabels) CHECK_NOTHROW(glyph_table(label).validate());
}

TEST_CASE("built-in table matches the resource file") {
  std::ifstream in(DRONELIGHT_GLYPH_FILE);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == builtin_glyph_json());
}

TEST_CASE("glyph tables accept other figures and reject bad ones") {
  const auto table = GlyphTable::from_json(
      R"({"version":1,"glyphs":{"heart":[[[0.5,0.2],[0.1,0.7],[0.3,0.9],[0.5,0.7],[0.7,0.9],[0.9,0.7],[0.5,0.2]]]}})");
  CHECK(table.contains("heart"));
  CHECK_FALSE(table.contains("S"));

  auto code_of = [](const char* text) {
    try {
      GlyphTable::from_json(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInternal;
  };
  CHECK(code_of(R"({"version":2,"glyphs":{}})") == ErrorCode::kFormat);
  CHECK(code_of(R"({"version":1,"glyphs":{"x":[[[0.5,0.5]]]}})") == ErrorCode::kFormat);
  CHECK(code_of(R"({"version":1,"glyphs":{"x":[[[0.5,1.5],[0,0]]]}})") == ErrorCode::kFormat);
}

TEST_CASE("a 2 m stroke at 0.5 m/s and 10 Hz has 41 lit setpoints") {
  Glyph g{"bar", {{{0.0, 0.5}, {1.0, 0.5}}}};
  PaintFrame frame;
  frame.width = 2.0;
  frame.height = 2.0;
  const auto p = glyph_path(g, frame, 0.5, 10.0);
  CHECK(lit_count(p) == 41);
  CHECK(p.setpoints.size() > 41);
}

TEST_CASE("frame width scales x offsets only") {
  PaintFrame narrow;
  PaintFrame wide = narrow;
  wide.width = 2.0;
  for (Label label : kAllLabels) {
    const auto& g = glyph_table(label);
    const auto a = glyph_path(g, narrow, 0.5, 10.0);
    const auto b = glyph_path(g, wide, 1.0, 10.0);  // doubling speed keeps the timing
    // Compare the lit stroke vertices, which both paths visit.
    for (const auto& stroke : g.strokes) {
      for (const auto& pt : stroke) {
        const auto pa = narrow.to_world(pt);
        const auto pb = wide.to_world(pt);
        CHECK(pb.x - wide.center.x == doctest::Approx(2.0 * (pa.x - narrow.center.x)).epsilon(1e-12));
        CHECK(pb.z == doctest::Approx(pa.z).epsilon(1e-12));
      }
    }
    CHECK(a.setpoints.size() >= lit_count(a));
    CHECK(b.setpoints.size() >= lit_count(b));
  }
}

TEST_CASE("paths stay inside the frame box") {
  const PaintFrame frame;
  for (Label label : kAllLabels) {
    for (const auto& s : letter_path(label, frame).setpoints) {
      CHECK(std::abs(s.position.x - frame.center.x) <= frame.width / 2 + 0.01);
      CHECK(std::abs(s.position.z - frame.center.z) <= frame.height / 2 + 0.01);
      CHECK(s.position.y == frame.center.y);
    }
  }
}

TEST_CASE("path timing, speed and lighting") {
  const PaintFrame frame;
  for (Label label : kAllLabels) {
    const auto p = letter_path(label, frame);
    REQUIRE(p.setpoints.size() >= 2);
    CHECK(p.setpoints.front().t == 0.0);
    CHECK(dist(p.setpoints.front().position, frame.center) < 1e-12);
    CHECK(dist(p.setpoints.back().position, frame.center) < 1e-12);
    CHECK_FALSE(p.setpoints.front().lit);
    CHECK_FALSE(p.setpoints.back().lit);
    for (std::size_t i = 1; i < p.setpoints.size(); ++i) {
      const auto& a = p.setpoints[i - 1];
      const auto& b = p.setpoints[i];
      CHECK(std::abs((b.t - a.t) - 0.1) < 1e-9);
      CHECK(dist(a.position, b.position) <= kMaxPaintSpeed * 0.1 + 1e-12);
      if (!b.lit) CHECK(b.led == Rgb{});
    }
  }
}

TEST_CASE("lit arc length matches the scaled stroke length") {
  const PaintFrame frame;
  for (Label label : kAllLabels) {
    const auto& g = glyph_table(label);
    const auto p = letter_path(label, frame);
    double lit_length = 0.0;
    for (std::size_t i = 1; i < p.setpoints.size(); ++i) {
      if (p.setpoints[i - 1].lit && p.setpoints[i].lit) {
        lit_length += dist(p.setpoints[i - 1].position, p.setpoints[i].position);
      }
    }
    // frame is 1 m square, so the unit-square length is also meters
    CAPTURE(to_char(label));
    CHECK(std::abs(lit_length - g.stroke_length()) <= 0.01 * g.stroke_length());
  }
}

TEST_CASE("strokes cycle through the palette") {
  const auto p = letter_path(Label::K, PaintFrame{});
  std::vector<Rgb> colors;
  for (const auto& s : p.setpoints) {
    if (s.lit && (colors.empty() || !(colors.back() == s.led))) colors.push_back(s.led);
  }
  REQUIRE(colors.size() == 2);
  CHECK(colors[0] == kStrokePalette[0]);
  CHECK(colors[1] == kStrokePalette[1]);
}

TEST_CASE("frame validation") {
  PaintFrame low;
  low.center.z = 0.6;
  try {
    letter_path(Label::S, low);
    FAIL("expected FrameTooLow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFrameTooLow);
  }
  PaintFrame flat;
  flat.height = 0.0;
  CHECK_THROWS_AS(flat.validate(), Error);
  CHECK_THROWS_AS(letter_path(Label::S, PaintFrame{}, 1.5, 10.0), Error);
  CHECK_THROWS_AS(letter_path(Label::S, PaintFrame{}, 0.5, 0.5), Error);
}

}
