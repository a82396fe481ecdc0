#include "dronelight/glyph.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dronelight/error.hpp"
#include "json.hpp"

namespace dronelight {

namespace {

using nlohmann::json;

Polyline parse_polyline(const json& j, const std::string& name) {
  if (!j.is_array()) throw Error(ErrorCode::kFormat, "glyph '" + name + "': stroke is not an array");
  Polyline line;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw Error(ErrorCode::kFormat, "glyph '" + name + "': point must be [x, y]");
    }
    line.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return line;
}

// Appends points i/n of the way from a to b for i = 1..n, n chosen so the
// spacing does not exceed step.
void emit_segment(Vec3 a, Vec3 b, double step, Rgb led, bool lit, double rate,
                  std::vector<PathSetpoint>& out) {
  const double length = (b - a).norm();
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(length / step - 1e-9)));
  for (std::size_t i = 1; i <= n; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(n);
    const double t = static_cast<double>(out.size()) / rate;
    out.push_back({t, a + (b - a) * f, led, lit});
  }
}

}  // namespace

double Glyph::stroke_length() const {
  double total = 0.0;
  for (const auto& stroke : strokes) {
    for (std::size_t i = 1; i < stroke.size(); ++i) total += distance(stroke[i - 1], stroke[i]);
  }
  return total;
}

void Glyph::validate() const {
  if (strokes.empty()) throw Error(ErrorCode::kFormat, "glyph '" + name + "' has no strokes");
  for (const auto& stroke : strokes) {
    if (stroke.size() < 2) {
      throw Error(ErrorCode::kFormat, "glyph '" + name + "' has a stroke with fewer than 2 points");
    }
    for (const Point2& p : stroke) {
      if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
        throw Error(ErrorCode::kFormat, "glyph '" + name + "' has a point outside the unit square");
      }
    }
  }
}

const GlyphTable& GlyphTable::builtin() {
  static const GlyphTable table = from_json(builtin_glyph_json());
  return table;
}

GlyphTable GlyphTable::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kFormat, std::string("glyph table: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("version") || doc["version"] != kVersion) {
    throw Error(ErrorCode::kFormat, "glyph table: unsupported or missing version");
  }
  if (!doc.contains("glyphs") || !doc["glyphs"].is_object()) {
    throw Error(ErrorCode::kFormat, "glyph table: missing \"glyphs\" object");
  }
  GlyphTable table;
  for (const auto& [name, strokes] : doc["glyphs"].items()) {
    if (!strokes.is_array()) throw Error(ErrorCode::kFormat, "glyph '" + name + "' is not an array");
    Glyph glyph{name, {}};
    for (const auto& stroke : strokes) glyph.strokes.push_back(parse_polyline(stroke, name));
    glyph.validate();
    table.glyphs_.emplace(name, std::move(glyph));
  }
  return table;
}

GlyphTable GlyphTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open glyph table '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return from_json(text.str());
}

const Glyph& GlyphTable::at(std::string_view name) const {
  auto it = glyphs_.find(name);
  if (it == glyphs_.end()) {
    throw Error(ErrorCode::kUnknownLabel, "no glyph named '" + std::string(name) + "'");
  }
  return it->second;
}

bool GlyphTable::contains(std::string_view name) const { return glyphs_.find(name) != glyphs_.end(); }

std::vector<std::string> GlyphTable::names() const {
  std::vector<std::string> out;
  for (const auto& [name, glyph] : glyphs_) out.push_back(name);
  return out;
}

void PaintFrame::validate() const {
  if (!(width > 0.0 && height > 0.0) || !center.finite()) {
    throw Error(ErrorCode::kInvalidArgument, "paint frame needs a finite center and positive size");
  }
  if (center.z - height / 2.0 < 0.2) {
    throw Error(ErrorCode::kFrameTooLow, "paint frame bottom is below 0.2 m");
  }
}

Vec3 PaintFrame::to_world(Point2 unit) const {
  return {center.x + (unit.x - 0.5) * width, center.y, center.z + (unit.y - 0.5) * height};
}

LetterPath glyph_path(const Glyph& glyph, const PaintFrame& frame, double speed, double rate) {
  frame.validate();
  glyph.validate();
  if (!(speed > 0.0 && speed <= kMaxPaintSpeed)) {
    throw Error(ErrorCode::kInvalidArgument, "paint speed must be in (0, 1] m/s");
  }
  if (!(rate >= 1.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::kInvalidArgument, "setpoint rate must be >= 1 Hz");
  }
  const double step = speed / rate;
  constexpr Rgb kOff{};

  LetterPath path;
  auto& out = path.setpoints;
  out.push_back({0.0, frame.center, kOff, false});

  Vec3 cursor = frame.center;
  for (std::size_t s = 0; s < glyph.strokes.size(); ++s) {
    const Polyline& stroke = glyph.strokes[s];
    const Rgb color = kStrokePalette[s % kStrokePalette.size()];
    const Vec3 start = frame.to_world(stroke.front());

    // Pen-up transit; the last point lands on the stroke start and is lit.
    emit_segment(cursor, start, step, kOff, false, rate, out);
    out.back().led = color;
    out.back().lit = true;

    for (std::size_t i = 1; i < stroke.size(); ++i) {
      emit_segment(frame.to_world(stroke[i - 1]), frame.to_world(stroke[i]), step, color, true,
                   rate, out);
    }
    cursor = frame.to_world(stroke.back());
  }
  emit_segment(cursor, frame.center, step, kOff, false, rate, out);
  return path;
}

}  // namespace dronelight
