#include <cmath>
#include <fstream>
#include <sstream>

#include "dronelight/error.hpp"
#include "dronelight/service.hpp"
#include "json.hpp"

namespace dronelight {

using nlohmann::json;

void ServiceConfig::validate() const {
  if (!(gate_threshold > 0.0 && gate_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gate_threshold must be in (0, 1)");
  }
  if (min_capture_len == 0) throw Error(ErrorCode::kInvalidArgument, "min_capture_len must be >= 1");
  if (buffer_cap < min_capture_len) {
    throw Error(ErrorCode::kInvalidArgument, "buffer_cap must be >= min_capture_len");
  }
  if (!(time_scale >= 0.0) || !std::isfinite(time_scale)) {
    throw Error(ErrorCode::kInvalidArgument, "time_scale must be >= 0");
  }
  if (!(telemetry_rate > 0.0) || !std::isfinite(telemetry_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "telemetry_rate must be positive");
  }
  if (!(speed > 0.0 && speed <= kMaxPaintSpeed)) {
    throw Error(ErrorCode::kInvalidArgument, "speed must be in (0, 1] m/s");
  }
  if (!(rate >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "rate must be >= 1 Hz");
  if (image_width == 0 || image_height == 0) {
    throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
  }
  filter.validate();
  frame.validate();
  gains.validate();
}

ServiceConfig ServiceConfig::from_json(std::string_view text) {
  ServiceConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::kFormat, "config must be a JSON object");
    c.port = j.value("port", c.port);
    c.bind_address = j.value("bind_address", c.bind_address);
    c.model_path = j.value("model_path", c.model_path);
    c.gate_threshold = j.value("gate_threshold", c.gate_threshold);
    c.min_capture_len = j.value("min_capture_len", c.min_capture_len);
    c.buffer_cap = j.value("buffer_cap", c.buffer_cap);
    c.speed = j.value("speed", c.speed);
    c.rate = j.value("rate", c.rate);
    c.telemetry_rate = j.value("telemetry_rate", c.telemetry_rate);
    c.time_scale = j.value("time_scale", c.time_scale);
    c.paint_dir = j.value("paint_dir", c.paint_dir);
    const std::string mode = j.value("paint_mode", std::string("inline"));
    if (mode == "inline") c.paint_mode = PaintDelivery::kInline;
    else if (mode == "path") c.paint_mode = PaintDelivery::kPath;
    else throw Error(ErrorCode::kFormat, "paint_mode must be \"inline\" or \"path\"");
    if (j.contains("frame")) {
      const json& f = j["frame"];
      if (f.contains("center")) {
        const auto center = f["center"].get<std::vector<double>>();
        if (center.size() != 3) throw Error(ErrorCode::kFormat, "frame.center needs 3 values");
        c.frame.center = {center[0], center[1], center[2]};
      }
      c.frame.width = f.value("width", c.frame.width);
      c.frame.height = f.value("height", c.frame.height);
    }
    if (j.contains("gains")) {
      const json& g = j["gains"];
      c.gains.kp = g.value("kp", c.gains.kp);
      c.gains.kd = g.value("kd", c.gains.kd);
      c.gains.dt = g.value("dt", c.gains.dt);
    }
    if (j.contains("image")) {
      c.image_width = j["image"].value("width", c.image_width);
      c.image_height = j["image"].value("height", c.image_height);
    }
    if (j.contains("filter")) {
      const json& f = j["filter"];
      c.filter.order = f.value("order", c.filter.order);
      c.filter.cutoff_ratio = f.value("cutoff_ratio", c.filter.cutoff_ratio);
      c.filter.pad_len = f.value("pad_len", 3 * c.filter.order);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ServiceConfig ServiceConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return from_json(text.str());
}

}  // namespace dronelight
