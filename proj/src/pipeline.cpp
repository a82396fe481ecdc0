#include "dronelight/pipeline.hpp"

#include <cstdio>
#include <string>

#include "dronelight/error.hpp"
#include "json.hpp"

namespace dronelight {

namespace {

using nlohmann::json;

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string counts_text(const ClassCounts& counts) {
  std::string out;
  for (std::size_t c = 0; c < kLabelCount; ++c) {
    if (c > 0) out += ", ";
    out += std::string(to_string(kAllLabels[c])) + " " + std::to_string(counts[c]);
  }
  return out;
}

std::size_t total(const ClassCounts& counts) {
  std::size_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

json counts_json(const ClassCounts& counts) {
  json j = json::object();
  for (std::size_t c = 0; c < kLabelCount; ++c) j[std::string(to_string(kAllLabels[c]))] = counts[c];
  return j;
}

std::string metrics_text(const Metrics& m, std::size_t samples) {
  std::string out;
  out += "samples: " + std::to_string(samples) + "\n";
  out += "accuracy: " + fixed4(m.accuracy) + "\n";
  out += "precision (macro): " + fixed4(m.precision_macro) + "\n";
  out += "recall (macro): " + fixed4(m.recall_macro) + "\n";
  out += "per-class precision/recall:\n";
  for (std::size_t c = 0; c < kLabelCount; ++c) {
    out += "  " + std::string(to_string(kAllLabels[c])) + "  " + fixed4(m.precision[c]) + "  " +
           fixed4(m.recall[c]) + "\n";
  }
  out += "confusion matrix (rows = true, cols = predicted):\n";
  char buf[64];
  out += "     ";
  for (Label l : kAllLabels) {
    std::snprintf(buf, sizeof buf, "%5c", to_char(l));
    out += buf;
  }
  out += "\n";
  for (std::size_t r = 0; r < kLabelCount; ++r) {
    std::snprintf(buf, sizeof buf, "  %c  ", to_char(kAllLabels[r]));
    out += buf;
    for (std::size_t c = 0; c < kLabelCount; ++c) {
      std::snprintf(buf, sizeof buf, "%5u", m.confusion.counts[r][c]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

json metrics_json(const Metrics& m, std::size_t samples) {
  json confusion = json::array();
  for (const auto& row : m.confusion.counts) confusion.push_back(row);
  return {{"samples", samples},
          {"accuracy", m.accuracy},
          {"averaging", "macro"},
          {"precision_macro", m.precision_macro},
          {"recall_macro", m.recall_macro},
          {"precision", m.precision},
          {"recall", m.recall},
          {"confusion", confusion}};
}

}  // namespace

TrainOutcome train_and_evaluate(const Dataset& ds, const TrainOptions& options) {
  TrainOutcome out;
  out.options = options;
  out.dataset_counts = ds.class_counts();

  const auto split = stratified_split(ds, options.train_count, options.test_count, options.seed);
  const Dataset train = ds.subset(split.train);
  const Dataset test = ds.subset(split.test);
  out.train_counts = train.class_counts();
  out.test_counts = test.class_counts();

  out.grid = grid_search(train, options.trees_grid, options.depth_grid, options.k, options.seed,
                         options.base);
  ForestParams best = options.base;
  best.n_trees = out.grid.best().n_trees;
  best.max_depth = out.grid.best().max_depth;
  best.seed = options.seed;
  out.model = forest_fit(train, best);
  out.test_metrics = evaluate(out.model, test);
  return out;
}

std::string format_train_report(const TrainOutcome& o, bool as_json) {
  const std::size_t test_n = total(o.test_counts);
  if (as_json) {
    json configs = json::array();
    for (const auto& s : o.grid.scores) {
      configs.push_back({{"n_trees", s.n_trees},
                         {"max_depth", s.max_depth},
                         {"cv_accuracy", s.mean_accuracy},
                         {"fold_accuracies", s.fold_accuracies}});
    }
    const json doc = {
        {"dataset", counts_json(o.dataset_counts)},
        {"train", counts_json(o.train_counts)},
        {"test", counts_json(o.test_counts)},
        {"k", o.options.k},
        {"seed", o.options.seed},
        {"configs", configs},
        {"best", {{"n_trees", o.grid.best().n_trees}, {"max_depth", o.grid.best().max_depth},
                  {"cv_accuracy", o.grid.best().mean_accuracy}}},
        {"test_metrics", metrics_json(o.test_metrics, test_n)}};
    return doc.dump(2) + "\n";
  }

  std::string out;
  out += "dataset: " + std::to_string(total(o.dataset_counts)) + " samples (" +
         counts_text(o.dataset_counts) + ")\n";
  out += "split: train " + std::to_string(total(o.train_counts)) + " (" +
         counts_text(o.train_counts) + "), test " + std::to_string(test_n) + " (" +
         counts_text(o.test_counts) + ")\n";
  out += "grid search: stratified " + std::to_string(o.options.k) + "-fold CV, seed " +
         std::to_string(o.options.seed) + "\n";
  out += "  n_trees  max_depth  cv_accuracy\n";
  char buf[96];
  for (const auto& s : o.grid.scores) {
    std::snprintf(buf, sizeof buf, "  %7zu  %9zu  %11s\n", s.n_trees, s.max_depth,
                  fixed4(s.mean_accuracy).c_str());
    out += buf;
  }
  out += "configs scored: " + std::to_string(o.grid.scores.size()) + "\n";
  out += "best: n_trees=" + std::to_string(o.grid.best().n_trees) +
         " max_depth=" + std::to_string(o.grid.best().max_depth) +
         " cv_accuracy=" + fixed4(o.grid.best().mean_accuracy) + "\n";
  out += "test metrics:\n";
  out += metrics_text(o.test_metrics, test_n);
  return out;
}

std::string format_metrics_report(const Metrics& metrics, std::size_t samples, bool as_json) {
  if (as_json) return metrics_json(metrics, samples).dump(2) + "\n";
  return metrics_text(metrics, samples);
}

Prediction classify_stream(const RandomForestModel& model, std::span<const ImuFrame> stream,
                           const ClassifyOptions& options) {
  const auto capture = gate_capture(stream, options.gate.threshold, options.gate.min_capture_len);
  return model.predict(featurize(capture, options.filter));
}

PaintResult paint_glyph(const Glyph& glyph, const PaintOptions& options) {
  PaintResult result;
  result.path = glyph_path(glyph, options.frame, options.speed, options.rate);
  result.trace = fly_path(result.path, options.gains);
  result.max_tracking_error = max_tracking_error(result.path, result.trace);
  CanvasParams canvas;
  canvas.width = options.image_width;
  canvas.height = options.image_height;
  canvas.frame = options.frame;
  result.image = to_image(render_exposure(result.trace, canvas));
  return result;
}

}  // namespace dronelight
