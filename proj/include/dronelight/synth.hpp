#pragma once

// Synthetic glove streams and labelled feature datasets.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dronelight/label.hpp"
#include "dronelight/signal.hpp"

namespace dronelight {

enum class Origin : std::uint8_t { kSynthetic, kRecorded, kUi };

const char* to_string(Origin origin) noexcept;

struct LabeledSample {
  FeatureVector features;
  Label label = Label::S;
  Origin origin = Origin::kSynthetic;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<LabeledSample> samples);

  /// Throws Error(kInvalidArgument) for non-finite features.
  void add(LabeledSample sample);

  const std::vector<LabeledSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const LabeledSample& operator[](std::size_t i) const { return samples_[i]; }
  const ClassCounts& class_counts() const noexcept { return counts_; }

  Dataset subset(const std::vector<std::size_t>& indices) const;

  friend bool operator==(const Dataset& a, const Dataset& b) { return a.samples_ == b.samples_; }

 private:
  std::vector<LabeledSample> samples_;
  ClassCounts counts_{};
};

struct SynthParams {
  double sample_rate = 50.0;      // Hz
  double stroke_duration = 1.2;   // s
  double noise_sigma = 0.4;       // m/s^2
  double tilt_jitter = 0.05;      // rad
  std::size_t lead_frames = 10;   // flex=0 frames on each side
  std::uint64_t seed = 42;
  double letter_size = 0.5;       // m, edge of the glyph's unit square

  void validate() const;
};

inline constexpr double kGravity = 9.81;

/// Simulated glove stream for one letter: the glyph strokes traced with
/// cosine-eased speed, accelerations by second central differences, a small
/// random plane tilt, gravity on +z and Gaussian noise. Deterministic in
/// (label, params).
std::vector<ImuFrame> synth_gesture(Label label, const SynthParams& params);

/// Per-sample seed: mix_seed(params.seed, label_index, sample_index).
std::uint64_t sample_seed(std::uint64_t seed, Label label, std::size_t sample_index) noexcept;

struct GateOptions {
  double threshold = kDefaultGateThreshold;
  std::size_t min_capture_len = kDefaultMinCaptureLen;
};

/// n_per_class gated and featurized streams per label, in label-major order.
Dataset gen_dataset(std::size_t n_per_class, const SynthParams& params,
                    const FilterSpec& filter = {}, const GateOptions& gate = {});

/// Line-delimited JSON. First line {"version":1,"feature_len":30,"labels":[...]},
/// then one {"label":..,"origin":..,"features":[30 numbers]} per sample.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

std::string dataset_to_jsonl(const Dataset& ds);
/// Throws Error(kFormat) naming the offending 1-based line.
Dataset dataset_from_jsonl(const std::string& text);

/// IMU streams use the wire format: one {"type":"imu","t":..,"ax":..,"ay":..,
/// "az":..,"flex":..} object per line.
void save_stream(const std::vector<ImuFrame>& stream, const std::string& path);
std::vector<ImuFrame> load_stream(const std::string& path);

}  // namespace dronelight
