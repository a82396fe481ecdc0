#include "dronelight/simflight.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dronelight/error.hpp"

namespace dronelight {

void ControllerGains::validate() const {
  if (!(kp > 0.0 && kd > 0.0) || !std::isfinite(kp) || !std::isfinite(kd)) {
    throw Error(ErrorCode::kInvalidArgument, "controller gains must be positive");
  }
  if (!(dt > 0.0 && dt <= 0.05)) throw Error(ErrorCode::kInvalidArgument, "dt must be in (0, 0.05]");
}

DroneState step(const DroneState& state, const Vec3& setpoint, const ControllerGains& gains,
                const Vec3& setpoint_velocity, const Vec3& setpoint_accel) {
  DroneState next = state;
  const Vec3 accel = gains.kp * (setpoint - state.position) +
                     gains.kd * (setpoint_velocity - state.velocity) + setpoint_accel;
  next.velocity = state.velocity + accel * gains.dt;
  next.position = state.position + next.velocity * gains.dt;
  next.t = state.t + gains.dt;
  return next;
}

std::size_t active_setpoint(const LetterPath& path, double t) {
  const auto& sp = path.setpoints;
  // Last setpoint with t_i <= t, tolerant of the k*dt rounding.
  auto it = std::upper_bound(sp.begin(), sp.end(), t + 1e-9,
                             [](double value, const PathSetpoint& s) { return value < s.t; });
  if (it == sp.begin()) return 0;
  return static_cast<std::size_t>(std::distance(sp.begin(), it)) - 1;
}

FlightTrace fly_path(const LetterPath& path, const ControllerGains& gains) {
  gains.validate();
  const auto& sp = path.setpoints;
  if (sp.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot fly an empty path");

  const double total = path.duration() + kSettleTail;
  const auto n = static_cast<std::size_t>(std::ceil(total / gains.dt - 1e-9));

  const auto velocity_at = [&sp](std::size_t i) {
    if (i + 1 >= sp.size()) return Vec3{};
    return (sp[i + 1].position - sp[i].position) * (1.0 / (sp[i + 1].t - sp[i].t));
  };

  FlightTrace trace;
  trace.dt = gains.dt;
  trace.states.reserve(n);
  DroneState state;
  state.position = sp.front().position;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * gains.dt;
    const std::size_t i = active_setpoint(path, t);
    state.t = t;
    state.led = sp[i].led;
    state.lit = sp[i].lit;
    trace.states.push_back(state);

    const Vec3 velocity = velocity_at(i);
    Vec3 accel;
    if (i + 1 < sp.size()) accel = (velocity_at(i + 1) - velocity) * (1.0 / (sp[i + 1].t - sp[i].t));
    state = step(state, sp[i].position, gains, velocity, accel);
    const double speed = state.velocity.norm();
    if (speed > kSpeedLimit) state.velocity = state.velocity * (kSpeedLimit / speed);
    if (!state.position.finite() || state.position.norm() > kDivergenceRadius) {
      throw Error(ErrorCode::kDivergence,
                  "flight diverged at t = " + std::to_string(state.t) + " s");
    }
  }
  return trace;
}

double max_tracking_error(const LetterPath& path, const FlightTrace& trace, double after) {
  double worst = 0.0;
  for (const auto& s : trace.states) {
    if (s.t + 1e-9 < after) continue;
    const auto& target = path.setpoints[active_setpoint(path, s.t)].position;
    worst = std::max(worst, (s.position - target).norm());
  }
  return worst;
}

PaintCanvas::PaintCanvas(std::size_t width, std::size_t height)
    : width_(width), height_(height), accum_(width * height * 3, 0.0) {
  if (width == 0 || height == 0) throw Error(ErrorCode::kInvalidArgument, "canvas must be non-empty");
}

PaintCanvas& PaintCanvas::operator+=(const PaintCanvas& other) {
  if (other.width_ != width_ || other.height_ != height_) {
    throw Error(ErrorCode::kInvalidArgument, "canvas sizes differ");
  }
  for (std::size_t i = 0; i < accum_.size(); ++i) accum_[i] += other.accum_[i];
  return *this;
}

std::vector<std::uint8_t> PaintCanvas::to_rgb8() const {
  const double peak = *std::max_element(accum_.begin(), accum_.end());
  std::vector<std::uint8_t> out(accum_.size(), 0);
  if (!(peak > 0.0)) return out;
  const double scale = 255.0 / peak;
  for (std::size_t i = 0; i < accum_.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(accum_[i] * scale), 0L, 255L));
  }
  return out;
}

std::pair<double, double> project(const CanvasParams& params, const Vec3& world) {
  const PaintFrame& f = params.frame;
  const double span_x = f.width * (1.0 + 2.0 * params.margin);
  const double span_z = f.height * (1.0 + 2.0 * params.margin);
  const double col = ((world.x - f.center.x) / span_x + 0.5) * static_cast<double>(params.width);
  const double row = (0.5 - (world.z - f.center.z) / span_z) * static_cast<double>(params.height);
  return {col, row};
}

PaintCanvas render_exposure(const FlightTrace& trace, const CanvasParams& params) {
  PaintCanvas canvas(params.width, params.height);
  const double inv_two_sigma_sq = 1.0 / (2.0 * params.sigma_px * params.sigma_px);
  const auto w = static_cast<long>(params.width);
  const auto h = static_cast<long>(params.height);
  for (const auto& s : trace.states) {
    if (!s.lit) continue;
    const auto [u, v] = project(params, s.position);
    const long cu = std::lround(u);
    const long cv = std::lround(v);
    const double energy[3] = {s.led.r * trace.dt, s.led.g * trace.dt, s.led.b * trace.dt};
    for (long row = cv - params.radius_px; row <= cv + params.radius_px; ++row) {
      if (row < 0 || row >= h) continue;
      for (long col = cu - params.radius_px; col <= cu + params.radius_px; ++col) {
        if (col < 0 || col >= w) continue;
        const double du = static_cast<double>(col) - u;
        const double dv = static_cast<double>(row) - v;
        const double weight = std::exp(-(du * du + dv * dv) * inv_two_sigma_sq);
        for (std::size_t c = 0; c < 3; ++c) {
          canvas.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col), c) +=
              energy[c] * weight;
        }
      }
    }
  }
  return canvas;
}

Image to_image(const PaintCanvas& canvas) {
  return {canvas.width(), canvas.height(), canvas.to_rgb8()};
}

std::string encode_ppm(const Image& image) {
  if (image.rgb.size() != image.width * image.height * 3) {
    throw Error(ErrorCode::kInvalidArgument, "image buffer does not match its size");
  }
  std::string out = "P3\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.reserve(out.size() + image.rgb.size() * 4);
  for (std::size_t row = 0; row < image.height; ++row) {
    for (std::size_t i = 0; i < image.width * 3; ++i) {
      if (i > 0) out += ' ';
      out += std::to_string(image.rgb[row * image.width * 3 + i]);
    }
    out += '\n';
  }
  return out;
}

Image decode_ppm(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  // '#' starts a comment that runs to the end of the line, anywhere in the file.
  auto next_token = [&]() -> std::string {
    std::string tok;
    while (true) {
      if (!(in >> tok)) throw Error(ErrorCode::kFormat, "ppm: unexpected end of data");
      if (tok[0] == '#') {
        std::getline(in, line);
        continue;
      }
      return tok;
    }
  };
  auto next_number = [&](const char* what) -> long {
    const std::string tok = next_token();
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kFormat, std::string("ppm: bad ") + what + " '" + tok + "'");
    }
  };

  if (next_token() != "P3") throw Error(ErrorCode::kFormat, "ppm: expected magic P3");
  const long width = next_number("width");
  const long height = next_number("height");
  const long maxval = next_number("maxval");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kFormat, "ppm: bad dimensions");
  if (maxval != 255) throw Error(ErrorCode::kFormat, "ppm: maxval must be 255");

  Image image{static_cast<std::size_t>(width), static_cast<std::size_t>(height), {}};
  image.rgb.resize(image.width * image.height * 3);
  for (auto& v : image.rgb) {
    const long sample = next_number("sample");
    if (sample < 0 || sample > 255) throw Error(ErrorCode::kFormat, "ppm: sample out of range");
    v = static_cast<std::uint8_t>(sample);
  }
  std::string extra;
  if (in >> extra) throw Error(ErrorCode::kFormat, "ppm: trailing data");
  return image;
}

void save_image(const Image& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << encode_ppm(image);
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

void save_image(const PaintCanvas& canvas, const std::string& path) {
  save_image(to_image(canvas), path);
}

}  // namespace dronelight
