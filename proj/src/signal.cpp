#include "dronelight/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "dronelight/error.hpp"

namespace dronelight {

namespace {

// Coefficients of prod (z - root_i), highest power first.
std::vector<std::complex<double>> expand_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> poly{1.0};
  for (const auto& root : roots) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= poly[i] * root;
    }
    poly = std::move(next);
  }
  return poly;
}

// Transposed direct form II, state initialised to the steady state reached
// after an infinite run of x[0]. For a unity-DC-gain filter that state is
// z_i = x0 * sum_{j>i} (b_j - a_j).
std::vector<double> lfilter_steady(const FilterCoefficients& c, const std::vector<double>& x) {
  const std::size_t n = c.a.size() - 1;
  std::vector<double> state(n, 0.0);
  double acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    acc += c.b[i + 1] - c.a[i + 1];
    state[i] = acc * x.front();
  }
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double out = c.b[0] * x[k] + state[0];
    for (std::size_t i = 0; i + 1 < n; ++i) {
      state[i] = c.b[i + 1] * x[k] + state[i + 1] - c.a[i + 1] * out;
    }
    state[n - 1] = c.b[n] * x[k] - c.a[n] * out;
    y[k] = out;
  }
  return y;
}

}  // namespace

bool FeatureVector::finite() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void validate_stream(std::span<const ImuFrame> stream) {
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const ImuFrame& f = stream[i];
    const bool finite = std::isfinite(f.t) && std::isfinite(f.flex) &&
                        std::all_of(f.accel.begin(), f.accel.end(),
                                    [](double v) { return std::isfinite(v); });
    if (!finite) {
      throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(i) + " is not finite");
    }
    if (f.t < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(i) + " has negative t");
    }
    if (f.flex < 0.0 || f.flex > 1.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "frame " + std::to_string(i) + " has flex outside [0, 1]");
    }
    if (i > 0 && !(f.t > stream[i - 1].t)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "frame " + std::to_string(i) + " timestamp is not increasing");
    }
  }
}

void FilterSpec::validate() const {
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "filter order must be >= 1");
  if (!(cutoff_ratio > 0.0 && cutoff_ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "filter cutoff_ratio must be in (0, 1)");
  }
  if (pad_len < 0) throw Error(ErrorCode::kInvalidArgument, "filter pad_len must be >= 0");
}

FilterCoefficients butterworth_lowpass(int order, double cutoff_ratio) {
  FilterSpec{order, cutoff_ratio, 0}.validate();

  // Analog prototype with a prewarped cutoff, sample rate normalised to 2.
  const double fs = 2.0;
  const double warped = 2.0 * fs * std::tan(std::numbers::pi * cutoff_ratio / fs);
  std::vector<std::complex<double>> z_poles;
  for (int k = 0; k < order; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    const std::complex<double> pole = warped * std::polar(1.0, theta);
    z_poles.push_back((2.0 * fs + pole) / (2.0 * fs - pole));
  }
  const auto a_complex = expand_roots(z_poles);
  const auto b_complex = expand_roots(std::vector<std::complex<double>>(order, -1.0));

  FilterCoefficients c;
  for (const auto& v : a_complex) c.a.push_back(v.real());
  for (const auto& v : b_complex) c.b.push_back(v.real());

  double sum_a = 0.0;
  double sum_b = 0.0;
  for (double v : c.a) sum_a += v;
  for (double v : c.b) sum_b += v;
  const double gain = sum_a / sum_b;
  for (double& v : c.b) v *= gain;
  return c;
}

GestureCapture gate_capture(std::span<const ImuFrame> stream, double threshold,
                            std::size_t min_capture_len) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gate threshold must be in (0, 1)");
  }
  validate_stream(stream);

  std::size_t best_start = 0;
  std::size_t best_len = 0;
  std::size_t run_start = 0;
  std::size_t run_len = 0;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (stream[i].flex >= threshold) {
      if (run_len == 0) run_start = i;
      ++run_len;
      if (run_len > best_len) {
        best_len = run_len;
        best_start = run_start;
      }
    } else {
      run_len = 0;
    }
  }
  if (best_len == 0) {
    throw Error(ErrorCode::kNoGesture, "no gesture detected");
  }
  if (best_len < min_capture_len) {
    throw Error(ErrorCode::kNoGesture, "no gesture detected (longest clasp " +
                                           std::to_string(best_len) + " frames, need " +
                                           std::to_string(min_capture_len) + ")");
  }
  GestureCapture capture;
  capture.frames.assign(stream.begin() + static_cast<std::ptrdiff_t>(best_start),
                        stream.begin() + static_cast<std::ptrdiff_t>(best_start + best_len));
  return capture;
}

std::vector<double> filtfilt(std::span<const double> x, const FilterSpec& spec) {
  spec.validate();
  const std::size_t pad = static_cast<std::size_t>(spec.pad_len);
  if (x.size() <= pad) {
    throw Error(ErrorCode::kSignalTooShort, "signal of " + std::to_string(x.size()) +
                                                " samples is too short for pad length " +
                                                std::to_string(pad));
  }
  const FilterCoefficients coeffs = butterworth_lowpass(spec.order, spec.cutoff_ratio);

  const std::size_t n = x.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  std::vector<double> y = lfilter_steady(coeffs, ext);
  std::reverse(y.begin(), y.end());
  y = lfilter_steady(coeffs, y);
  std::reverse(y.begin(), y.end());
  return {y.begin() + static_cast<std::ptrdiff_t>(pad),
          y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

std::vector<double> resample(std::span<const double> x, std::size_t n) {
  if (x.size() < 2 || n < 2) {
    throw Error(ErrorCode::kBadLength, "resample needs >= 2 input samples and n >= 2 (got " +
                                           std::to_string(x.size()) + " -> " +
                                           std::to_string(n) + ")");
  }
  std::vector<double> out(n);
  const double step = static_cast<double>(x.size() - 1) / static_cast<double>(n - 1);
  out.front() = x.front();
  out.back() = x.back();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double pos = static_cast<double>(i) * step;
    const std::size_t lo = std::min(static_cast<std::size_t>(pos), x.size() - 2);
    const double frac = pos - static_cast<double>(lo);
    out[i] = x[lo] + frac * (x[lo + 1] - x[lo]);
  }
  return out;
}

FeatureVector featurize(const GestureCapture& capture, const FilterSpec& spec) {
  if (capture.frames.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot featurize an empty capture");
  }
  FeatureVector features;
  std::vector<double> axis(capture.frames.size());
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t i = 0; i < capture.frames.size(); ++i) axis[i] = capture.frames[i].accel[a];
    const auto reduced = resample(filtfilt(axis, spec), kFeaturesPerAxis);
    std::copy(reduced.begin(), reduced.end(),
              features.values.begin() + static_cast<std::ptrdiff_t>(a * kFeaturesPerAxis));
  }
  return features;
}

}  // namespace dronelight
