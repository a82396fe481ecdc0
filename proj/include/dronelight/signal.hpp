#pragma once

// Gesture capture gating, zero-phase smoothing and feature reduction.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dronelight {

inline constexpr std::size_t kFeaturesPerAxis = 10;
inline constexpr std::size_t kFeatureLen = 3 * kFeaturesPerAxis;
inline constexpr std::size_t kDefaultMinCaptureLen = 12;
inline constexpr double kDefaultGateThreshold = 0.5;

/// One glove reading. accel is in m/s^2 including gravity; flex is 1 when
/// the hand is fully clasped.
struct ImuFrame {
  double t = 0.0;
  std::array<double, 3> accel{};
  double flex = 0.0;

  friend bool operator==(const ImuFrame&, const ImuFrame&) = default;
};

/// Throws Error(kInvalidArgument) unless every frame is finite, flex is in
/// [0, 1], t is non-negative and timestamps strictly increase.
void validate_stream(std::span<const ImuFrame> stream);

struct GestureCapture {
  std::vector<ImuFrame> frames;
  std::string source_id;
};

struct FilterSpec {
  int order = 2;
  double cutoff_ratio = 0.2;  // fraction of Nyquist
  int pad_len = 6;

  void validate() const;
};

/// Transfer function coefficients, a[0] == 1.
struct FilterCoefficients {
  std::vector<double> b;
  std::vector<double> a;
};

/// Digital low-pass Butterworth via the bilinear transform, normalised to
/// unity DC gain.
FilterCoefficients butterworth_lowpass(int order, double cutoff_ratio);

/// Axis-major [x0..x9, y0..y9, z0..z9].
struct FeatureVector {
  std::array<double, kFeatureLen> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  bool finite() const noexcept;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Longest contiguous run of frames with flex >= threshold; the earliest run
/// wins ties. Throws Error(kNoGesture) when no run reaches min_capture_len.
GestureCapture gate_capture(std::span<const ImuFrame> stream, double threshold,
                            std::size_t min_capture_len = kDefaultMinCaptureLen);

/// Forward-backward IIR filtering over an odd-reflection padded copy.
/// Each pass starts from the filter's steady state for its first input
/// sample. Throws Error(kSignalTooShort) if x.size() <= pad_len.
std::vector<double> filtfilt(std::span<const double> x, const FilterSpec& spec);

/// Linear interpolation of x at i*(len-1)/(n-1); endpoints are copied exactly.
std::vector<double> resample(std::span<const double> x, std::size_t n);

FeatureVector featurize(const GestureCapture& capture, const FilterSpec& spec);

}  // namespace dronelight
