#pragma once

// Letter geometry and the light-painting flight path built from it.

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dronelight/geometry.hpp"
#include "dronelight/label.hpp"

namespace dronelight {

using Polyline = std::vector<Point2>;

/// Strokes in the unit square, y up. The pen is lifted between strokes.
struct Glyph {
  std::string name;
  std::vector<Polyline> strokes;

  double stroke_length() const;
  void validate() const;
};

/// Versioned glyph resource: {"version":1, "glyphs": {"S": [[[x,y],...],...], ...}}.
/// Keys are free-form names so figures other than letters can be added.
class GlyphTable {
 public:
  static constexpr int kVersion = 1;

  /// The table compiled into the library from data/glyphs.json.
  static const GlyphTable& builtin();
  static GlyphTable from_json(std::string_view text);
  static GlyphTable load(const std::string& path);

  const Glyph& at(std::string_view name) const;
  const Glyph& at(Label label) const { return at(to_string(label)); }
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Glyph, std::less<>> glyphs_;
};

/// JSON text of the built-in table, byte-identical to data/glyphs.json.
std::string_view builtin_glyph_json();

inline const Glyph& glyph_table(Label label) { return GlyphTable::builtin().at(label); }

/// Letters are drawn in the x-z plane through center, viewed along -y.
struct PaintFrame {
  Vec3 center{0.0, 0.0, 1.5};
  double width = 1.0;
  double height = 1.0;

  /// Throws Error(kFrameTooLow) if the frame dips below 0.2 m, and
  /// Error(kInvalidArgument) for non-positive sizes.
  void validate() const;
  Vec3 to_world(Point2 unit) const;
};

struct PathSetpoint {
  double t = 0.0;
  Vec3 position;
  Rgb led;
  bool lit = false;
};

struct LetterPath {
  std::vector<PathSetpoint> setpoints;

  double duration() const { return setpoints.empty() ? 0.0 : setpoints.back().t; }
};

inline constexpr std::array<Rgb, 6> kStrokePalette = {{
    {255, 0, 0},
    {0, 255, 0},
    {0, 0, 255},
    {255, 255, 0},
    {255, 0, 255},
    {0, 255, 255},
}};

inline constexpr double kDefaultPaintSpeed = 0.5;
inline constexpr double kDefaultSetpointRate = 10.0;
inline constexpr double kMaxPaintSpeed = 1.0;

/// Flies from the frame center through every stroke and back. Strokes are
/// sampled at a constant spacing no larger than speed/rate, lit in
/// kStrokePalette[stroke % 6]; pen-up transits and the lead-in/out are unlit.
LetterPath glyph_path(const Glyph& glyph, const PaintFrame& frame,
                      double speed = kDefaultPaintSpeed, double rate = kDefaultSetpointRate);

inline LetterPath letter_path(Label label, const PaintFrame& frame,
                              double speed = kDefaultPaintSpeed,
                              double rate = kDefaultSetpointRate) {
  return glyph_path(glyph_table(label), frame, speed, rate);
}

}  // namespace dronelight
