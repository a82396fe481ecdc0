#include "dronelight/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dronelight/error.hpp"
#include "dronelight/glyph.hpp"
#include "dronelight/rng.hpp"
#include "json.hpp"

namespace dronelight {

namespace {

using nlohmann::json;

// Arc-length parameterised polyline through all strokes of a glyph.
class StrokeCurve {
 public:
  explicit StrokeCurve(const Glyph& glyph, double scale) {
    for (const auto& stroke : glyph.strokes) {
      for (const Point2& p : stroke) {
        const Point2 scaled{p.x * scale, p.y * scale};
        if (!points_.empty()) {
          const double d = distance(points_.back(), scaled);
          if (d == 0.0) continue;
          cumulative_.push_back(cumulative_.back() + d);
        } else {
          cumulative_.push_back(0.0);
        }
        points_.push_back(scaled);
      }
    }
  }

  double length() const { return cumulative_.back(); }

  Point2 at(double s) const {
    if (s <= 0.0) return points_.front();
    if (s >= length()) return points_.back();
    std::size_t i = 1;
    while (cumulative_[i] < s) ++i;
    const double f = (s - cumulative_[i - 1]) / (cumulative_[i] - cumulative_[i - 1]);
    return {points_[i - 1].x + f * (points_[i].x - points_[i - 1].x),
            points_[i - 1].y + f * (points_[i].y - points_[i - 1].y)};
  }

 private:
  std::vector<Point2> points_;
  std::vector<double> cumulative_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

std::vector<std::string> label_names() {
  std::vector<std::string> names;
  for (Label label : kAllLabels) names.emplace_back(to_string(label));
  return names;
}

// Written with keys in the documented order.
nlohmann::ordered_json header_json() {
  return {{"version", 1}, {"feature_len", kFeatureLen}, {"labels", label_names()}};
}

Error format_error(std::size_t line, const std::string& what) {
  return Error(ErrorCode::kFormat, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

const char* to_string(Origin origin) noexcept {
  switch (origin) {
    case Origin::kSynthetic: return "synthetic";
    case Origin::kRecorded: return "recorded";
    case Origin::kUi: return "ui";
  }
  return "synthetic";
}

Dataset::Dataset(std::vector<LabeledSample> samples) {
  for (auto& s : samples) add(std::move(s));
}

void Dataset::add(LabeledSample sample) {
  if (!sample.features.finite()) {
    throw Error(ErrorCode::kInvalidArgument, "sample features must be finite");
  }
  ++counts_[index_of(sample.label)];
  samples_.push_back(std::move(sample));
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  for (std::size_t i : indices) out.add(samples_.at(i));
  return out;
}

void SynthParams::validate() const {
  const bool ok = sample_rate > 0.0 && stroke_duration > 0.0 && noise_sigma >= 0.0 &&
                  tilt_jitter >= 0.0 && lead_frames > 0 && letter_size > 0.0 &&
                  std::isfinite(sample_rate) && std::isfinite(stroke_duration) &&
                  std::isfinite(noise_sigma) && std::isfinite(tilt_jitter) &&
                  std::isfinite(letter_size);
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "invalid synthesis parameters");
}

std::vector<ImuFrame> synth_gesture(Label label, const SynthParams& params) {
  params.validate();
  Rng rng(params.seed);
  const StrokeCurve curve(glyph_table(label), params.letter_size);

  const double h = 1.0 / params.sample_rate;
  const double duration = params.stroke_duration;
  const double length = curve.length();
  auto position = [&](double tau) {
    const double clamped = std::clamp(tau, 0.0, duration);
    return curve.at(length * 0.5 * (1.0 - std::cos(std::numbers::pi * clamped / duration)));
  };

  // Plane tilt: rotate about x by alpha, then about y by beta.
  const double alpha = params.tilt_jitter * rng.normal();
  const double beta = params.tilt_jitter * rng.normal();
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);

  const auto stroke_frames =
      static_cast<std::size_t>(std::llround(duration * params.sample_rate)) + 1;
  const std::size_t total = stroke_frames + 2 * params.lead_frames;

  std::vector<ImuFrame> frames;
  frames.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    ImuFrame f;
    f.t = static_cast<double>(k) * h;
    double ax = 0.0, ay = 0.0, az = 0.0;
    const bool in_stroke = k >= params.lead_frames && k < params.lead_frames + stroke_frames;
    if (in_stroke) {
      const double tau = static_cast<double>(k - params.lead_frames) * h;
      const Point2 prev = position(tau - h);
      const Point2 cur = position(tau);
      const Point2 next = position(tau + h);
      const double px = (next.x - 2.0 * cur.x + prev.x) / (h * h);
      const double py = (next.y - 2.0 * cur.y + prev.y) / (h * h);
      // Ry(beta) * Rx(alpha) * (px, py, 0)
      const double x1 = px, y1 = ca * py, z1 = sa * py;
      ax = cb * x1 + sb * z1;
      ay = y1;
      az = -sb * x1 + cb * z1;
      f.flex = 1.0;
    }
    f.accel = {ax + params.noise_sigma * rng.normal(), ay + params.noise_sigma * rng.normal(),
               az + kGravity + params.noise_sigma * rng.normal()};
    frames.push_back(f);
  }
  return frames;
}

std::uint64_t sample_seed(std::uint64_t seed, Label label, std::size_t sample_index) noexcept {
  return mix_seed(seed, index_of(label), sample_index);
}

Dataset gen_dataset(std::size_t n_per_class, const SynthParams& params, const FilterSpec& filter,
                    const GateOptions& gate) {
  if (n_per_class == 0) throw Error(ErrorCode::kInvalidArgument, "n_per_class must be >= 1");
  params.validate();
  filter.validate();
  Dataset ds;
  for (Label label : kAllLabels) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      SynthParams p = params;
      p.seed = sample_seed(params.seed, label, i);
      const auto stream = synth_gesture(label, p);
      const auto capture = gate_capture(stream, gate.threshold, gate.min_capture_len);
      ds.add({featurize(capture, filter), label, Origin::kSynthetic});
    }
  }
  return ds;
}

std::string dataset_to_jsonl(const Dataset& ds) {
  std::string out = header_json().dump() + "\n";
  for (const auto& s : ds.samples()) {
    nlohmann::ordered_json features = nlohmann::ordered_json::array();
    for (double v : s.features.values) features.push_back(v);
    const nlohmann::ordered_json line = {{"label", std::string(to_string(s.label))},
                       {"origin", to_string(s.origin)},
                       {"features", features}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

Dataset dataset_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  Dataset ds;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw format_error(line_no, "invalid JSON");
    }
    if (!have_header) {
      if (!j.is_object() || j.value("version", 0) != 1 ||
          j.value("feature_len", std::size_t{0}) != kFeatureLen || j.value("labels", json()) != json(label_names())) {
        throw format_error(line_no, "unsupported dataset header");
      }
      have_header = true;
      continue;
    }
    if (!j.is_object() || !j.contains("label") || !j["label"].is_string() ||
        !j.contains("features") || !j["features"].is_array()) {
      throw format_error(line_no, "record needs \"label\" and \"features\"");
    }
    auto label = parse_label(j["label"].get<std::string>());
    if (!label) throw format_error(line_no, "unknown label");
    const auto& values = j["features"];
    if (values.size() != kFeatureLen) {
      throw format_error(line_no, "expected " + std::to_string(kFeatureLen) + " features, got " +
                                      std::to_string(values.size()));
    }
    LabeledSample sample;
    sample.label = *label;
    for (std::size_t i = 0; i < kFeatureLen; ++i) {
      if (!values[i].is_number()) throw format_error(line_no, "feature is not a number");
      sample.features[i] = values[i].get<double>();
    }
    if (!sample.features.finite()) throw format_error(line_no, "non-finite feature");
    const std::string origin = j.value("origin", std::string("synthetic"));
    if (origin == "synthetic") sample.origin = Origin::kSynthetic;
    else if (origin == "recorded") sample.origin = Origin::kRecorded;
    else if (origin == "ui") sample.origin = Origin::kUi;
    else throw format_error(line_no, "unknown origin '" + origin + "'");
    ds.add(sample);
  }
  if (!have_header) throw format_error(line_no == 0 ? 1 : line_no, "missing dataset header");
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) { write_file(path, dataset_to_jsonl(ds)); }

Dataset load_dataset(const std::string& path) { return dataset_from_jsonl(read_file(path)); }

void save_stream(const std::vector<ImuFrame>& stream, const std::string& path) {
  std::string out;
  for (const auto& f : stream) {
    const nlohmann::ordered_json j = {{"type", "imu"},       {"t", f.t},         {"ax", f.accel[0]},
                    {"ay", f.accel[1]},    {"az", f.accel[2]}, {"flex", f.flex}};
    out += j.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<ImuFrame> load_stream(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  std::vector<ImuFrame> frames;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw format_error(line_no, "invalid JSON");
    }
    if (!j.is_object() || j.value("type", std::string()) != "imu") {
      throw format_error(line_no, "expected an imu record");
    }
    ImuFrame f;
    try {
      f.t = j.at("t").get<double>();
      f.accel = {j.at("ax").get<double>(), j.at("ay").get<double>(), j.at("az").get<double>()};
      f.flex = j.at("flex").get<double>();
    } catch (const json::exception&) {
      throw format_error(line_no, "imu record needs numeric t, ax, ay, az, flex");
    }
    frames.push_back(f);
  }
  try {
    validate_stream(frames);
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, path + ": " + e.what());
  }
  return frames;
}

}  // namespace dronelight
