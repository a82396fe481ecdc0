#pragma once

// Point-mass quadcopter tracking a LetterPath, and the long-exposure render
// of its LED trace.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dronelight/geometry.hpp"
#include "dronelight/glyph.hpp"

namespace dronelight {

struct DroneState {
  double t = 0.0;
  Vec3 position;
  Vec3 velocity;
  Rgb led;
  bool lit = false;
};

struct ControllerGains {
  double kp = 4.0;   // 1/s^2
  double kd = 4.0;   // 1/s
  double dt = 0.01;  // s

  void validate() const;
};

/// One symplectic Euler step of the PD law
///   accel = kp (setpoint - pos) + kd (setpoint_velocity - vel) + setpoint_accel
///   vel += accel dt;  pos += vel dt
/// The velocity and acceleration feed-forward terms are zero for a held
/// setpoint, which leaves the plain PD response.
DroneState step(const DroneState& state, const Vec3& setpoint, const ControllerGains& gains,
                const Vec3& setpoint_velocity = {}, const Vec3& setpoint_accel = {});

struct FlightTrace {
  double dt = 0.01;
  std::vector<DroneState> states;  // states[k].t == k * dt
};

inline constexpr double kSettleTail = 1.0;
inline constexpr double kDivergenceRadius = 10.0;
inline constexpr double kSpeedLimit = 2.0 * kMaxPaintSpeed;

/// Setpoint i is the target during [t_i, t_{i+1}) with feed-forward velocity
/// v_i = (p_{i+1} - p_i) / (t_{i+1} - t_i) and acceleration
/// (v_{i+1} - v_i) / (t_{i+1} - t_i); the last one is held through a 1 s
/// settle tail. Starts at rest on the first setpoint; the LED follows the
/// active setpoint. Throws Error(kDivergence) past 10 m from the origin.
FlightTrace fly_path(const LetterPath& path, const ControllerGains& gains = {});

/// Index of the setpoint active at time t.
std::size_t active_setpoint(const LetterPath& path, double t);

/// Largest distance between the drone and its active setpoint for t >= after.
double max_tracking_error(const LetterPath& path, const FlightTrace& trace, double after = 0.5);

struct CanvasParams {
  std::size_t width = 512;
  std::size_t height = 512;
  PaintFrame frame;
  double margin = 0.1;  // fraction of the frame added on each side
  double sigma_px = 1.5;
  int radius_px = 4;
};

/// Linear RGB exposure accumulator. Export normalises the brightest channel
/// to 255.
class PaintCanvas {
 public:
  PaintCanvas(std::size_t width, std::size_t height);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  /// Raw accumulated energy, 3 channels per pixel, row-major.
  const std::vector<double>& accumulation() const noexcept { return accum_; }
  double& at(std::size_t row, std::size_t col, std::size_t channel) {
    return accum_[(row * width_ + col) * 3 + channel];
  }
  double at(std::size_t row, std::size_t col, std::size_t channel) const {
    return accum_[(row * width_ + col) * 3 + channel];
  }

  PaintCanvas& operator+=(const PaintCanvas& other);

  /// 8-bit RGB, row-major.
  std::vector<std::uint8_t> to_rgb8() const;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> accum_;
};

/// Orthographic camera along -y over the frame's x-z rectangle plus margin.
/// Returns continuous pixel coordinates (column, row); the frame center maps
/// to (width/2, height/2).
std::pair<double, double> project(const CanvasParams& params, const Vec3& world);

/// Splats a Gaussian spot of the LED color times dt for every lit state.
PaintCanvas render_exposure(const FlightTrace& trace, const CanvasParams& params);

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;

  friend bool operator==(const Image&, const Image&) = default;
};

Image to_image(const PaintCanvas& canvas);

/// ASCII "P3" with one image row per line.
std::string encode_ppm(const Image& image);
/// Accepts P3 with arbitrary whitespace and '#' comments; maxval must be 255.
Image decode_ppm(const std::string& text);
void save_image(const PaintCanvas& canvas, const std::string& path);
void save_image(const Image& image, const std::string& path);

}  // namespace dronelight
