#pragma once

// End-to-end operations shared by the C API, the service and the tests.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dronelight/forest.hpp"
#include "dronelight/glyph.hpp"
#include "dronelight/signal.hpp"
#include "dronelight/simflight.hpp"
#include "dronelight/synth.hpp"

namespace dronelight {

inline constexpr std::size_t kDefaultTreesGrid[] = {50, 100, 200, 300};
inline constexpr std::size_t kDefaultDepthGrid[] = {2, 3, 4, 6};

struct TrainOptions {
  std::size_t train_count = 75;
  std::size_t test_count = 50;
  std::size_t k = 5;
  std::uint64_t seed = 42;
  std::vector<std::size_t> trees_grid{std::begin(kDefaultTreesGrid), std::end(kDefaultTreesGrid)};
  std::vector<std::size_t> depth_grid{std::begin(kDefaultDepthGrid), std::end(kDefaultDepthGrid)};
  ForestParams base;  // min_leaf and features_per_split
};

struct TrainOutcome {
  TrainOptions options;
  ClassCounts dataset_counts{};
  ClassCounts train_counts{};
  ClassCounts test_counts{};
  GridSearchResult grid;
  RandomForestModel model;
  Metrics test_metrics;
};

/// Stratified train/test split, grid search with stratified k-fold CV on the
/// training part, refit of the best config on the whole training part and
/// evaluation on the test part.
TrainOutcome train_and_evaluate(const Dataset& ds, const TrainOptions& options);

/// Fixed-layout text report (or a JSON document when json is true).
std::string format_train_report(const TrainOutcome& outcome, bool json);
std::string format_metrics_report(const Metrics& metrics, std::size_t samples, bool json);

struct ClassifyOptions {
  GateOptions gate;
  FilterSpec filter;
};

/// Gate, featurize and classify a raw stream. Throws Error(kNoGesture).
Prediction classify_stream(const RandomForestModel& model, std::span<const ImuFrame> stream,
                           const ClassifyOptions& options = {});

struct PaintOptions {
  PaintFrame frame;
  double speed = kDefaultPaintSpeed;
  double rate = kDefaultSetpointRate;
  ControllerGains gains;
  std::size_t image_width = 512;
  std::size_t image_height = 512;
};

struct PaintResult {
  LetterPath path;
  FlightTrace trace;
  Image image;
  double max_tracking_error = 0.0;
};

/// glyph -> path -> simulated flight -> exposure -> 8-bit image.
PaintResult paint_glyph(const Glyph& glyph, const PaintOptions& options = {});
inline PaintResult paint_letter(Label label, const PaintOptions& options = {}) {
  return paint_glyph(glyph_table(label), options);
}

}  // namespace dronelight
