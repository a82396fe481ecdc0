#include "dronelight/dronelight.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "dronelight/error.hpp"
#include "dronelight/pipeline.hpp"
#include "dronelight/service.hpp"

using namespace dronelight;

struct dl_dataset {
  Dataset value;
};
struct dl_model {
  std::shared_ptr<const RandomForestModel> value;
};
struct dl_stream {
  std::vector<ImuFrame> frames;
};
struct dl_server {
  std::unique_ptr<Server> value;
};

namespace {

thread_local std::string g_last_error;

dl_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return DL_ERR_INVALID_ARGUMENT;
    case ErrorCode::kIo: return DL_ERR_IO;
    case ErrorCode::kFormat: return DL_ERR_FORMAT;
    case ErrorCode::kNoGesture: return DL_ERR_NO_GESTURE;
    case ErrorCode::kSignalTooShort: return DL_ERR_SIGNAL_TOO_SHORT;
    case ErrorCode::kBadLength: return DL_ERR_BAD_LENGTH;
    case ErrorCode::kEmptyCounts: return DL_ERR_EMPTY_COUNTS;
    case ErrorCode::kMissingClass: return DL_ERR_MISSING_CLASS;
    case ErrorCode::kTooFewPerClass: return DL_ERR_TOO_FEW_PER_CLASS;
    case ErrorCode::kUnknownLabel: return DL_ERR_UNKNOWN_LABEL;
    case ErrorCode::kFrameTooLow: return DL_ERR_FRAME_TOO_LOW;
    case ErrorCode::kDivergence: return DL_ERR_DIVERGENCE;
    case ErrorCode::kPortInUse: return DL_ERR_PORT_IN_USE;
    case ErrorCode::kInternal: return DL_ERR_INTERNAL;
  }
  return DL_ERR_INTERNAL;
}

dl_status fail(dl_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
dl_status guarded(F&& body) {
  try {
    body();
    return DL_OK;
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DL_ERR_INTERNAL, e.what());
  }
}

void require(bool condition, const char* what) {
  if (!condition) throw Error(ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

SynthParams synth_from(const dl_synth_params* p) {
  if (!p) return {};
  SynthParams out;
  out.sample_rate = p->sample_rate;
  out.stroke_duration = p->stroke_duration;
  out.noise_sigma = p->noise_sigma;
  out.tilt_jitter = p->tilt_jitter;
  out.letter_size = p->letter_size;
  out.lead_frames = p->lead_frames;
  out.seed = p->seed;
  return out;
}

Label label_from(char letter) { return require_label(std::string_view(&letter, 1)); }

}  // namespace

extern "C" {

const char* dl_version(void) { return "1.0.0"; }

const char* dl_status_name(dl_status status) {
  switch (status) {
    case DL_OK: return "ok";
    case DL_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case DL_ERR_IO: return "io_error";
    case DL_ERR_FORMAT: return "format_error";
    case DL_ERR_NO_GESTURE: return "no_gesture";
    case DL_ERR_SIGNAL_TOO_SHORT: return "signal_too_short";
    case DL_ERR_BAD_LENGTH: return "bad_length";
    case DL_ERR_EMPTY_COUNTS: return "empty_counts";
    case DL_ERR_MISSING_CLASS: return "missing_class";
    case DL_ERR_TOO_FEW_PER_CLASS: return "too_few_per_class";
    case DL_ERR_UNKNOWN_LABEL: return "unknown_label";
    case DL_ERR_FRAME_TOO_LOW: return "frame_too_low";
    case DL_ERR_DIVERGENCE: return "divergence";
    case DL_ERR_PORT_IN_USE: return "port_in_use";
    case DL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* dl_last_error_message(void) { return g_last_error.c_str(); }

void dl_string_free(char* text) { std::free(text); }

const char* dl_labels(void) { return "SKOLJ"; }

void dl_synth_params_default(dl_synth_params* params) {
  if (!params) return;
  const SynthParams d;
  *params = {d.sample_rate, d.stroke_duration, d.noise_sigma, d.tilt_jitter,
             d.letter_size, static_cast<uint32_t>(d.lead_frames), d.seed};
}

dl_status dl_stream_synthesize(char letter, const dl_synth_params* params, dl_stream** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    auto stream = std::make_unique<dl_stream>();
    stream->frames = synth_gesture(label_from(letter), synth_from(params));
    *out = stream.release();
  });
}

dl_status dl_stream_create(const dl_imu_frame* frames, size_t count, dl_stream** out) {
  return guarded([&] {
    require(out != nullptr && (frames != nullptr || count == 0), "null argument");
    auto stream = std::make_unique<dl_stream>();
    for (size_t i = 0; i < count; ++i) {
      stream->frames.push_back({frames[i].t, {frames[i].ax, frames[i].ay, frames[i].az}, frames[i].flex});
    }
    validate_stream(stream->frames);
    *out = stream.release();
  });
}

dl_status dl_stream_load(const char* path, dl_stream** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    auto stream = std::make_unique<dl_stream>();
    stream->frames = load_stream(path);
    *out = stream.release();
  });
}

dl_status dl_stream_save(const dl_stream* stream, const char* path) {
  return guarded([&] {
    require(stream != nullptr && path != nullptr, "null argument");
    save_stream(stream->frames, path);
  });
}

size_t dl_stream_size(const dl_stream* stream) { return stream ? stream->frames.size() : 0; }

dl_status dl_stream_frame(const dl_stream* stream, size_t index, dl_imu_frame* out) {
  return guarded([&] {
    require(stream != nullptr && out != nullptr, "null argument");
    require(index < stream->frames.size(), "frame index out of range");
    const ImuFrame& f = stream->frames[index];
    *out = {f.t, f.accel[0], f.accel[1], f.accel[2], f.flex};
  });
}

void dl_stream_free(dl_stream* stream) { delete stream; }

dl_status dl_dataset_generate(size_t per_class, const dl_synth_params* params, dl_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    auto ds = std::make_unique<dl_dataset>();
    ds->value = gen_dataset(per_class, synth_from(params));
    *out = ds.release();
  });
}

dl_status dl_dataset_load(const char* path, dl_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    auto ds = std::make_unique<dl_dataset>();
    ds->value = load_dataset(path);
    *out = ds.release();
  });
}

dl_status dl_dataset_save(const dl_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset != nullptr && path != nullptr, "null argument");
    save_dataset(dataset->value, path);
  });
}

size_t dl_dataset_size(const dl_dataset* dataset) { return dataset ? dataset->value.size() : 0; }

void dl_dataset_class_counts(const dl_dataset* dataset, size_t counts[DL_LABEL_COUNT]) {
  if (!counts) return;
  for (size_t c = 0; c < DL_LABEL_COUNT; ++c) {
    counts[c] = dataset ? dataset->value.class_counts()[c] : 0;
  }
}

void dl_dataset_free(dl_dataset* dataset) { delete dataset; }

void dl_train_options_default(dl_train_options* options) {
  if (!options) return;
  const TrainOptions d;
  *options = {d.train_count, d.test_count, d.k, d.seed, nullptr, 0, nullptr, 0, 0};
}

dl_status dl_train(const dl_dataset* dataset, const dl_train_options* options, dl_model** model_out,
                   char** report_out) {
  return guarded([&] {
    require(dataset != nullptr && options != nullptr, "null argument");
    TrainOptions opts;
    opts.train_count = options->train_count;
    opts.test_count = options->test_count;
    opts.k = options->k;
    opts.seed = options->seed;
    if (options->trees_grid) {
      opts.trees_grid.assign(options->trees_grid, options->trees_grid + options->trees_grid_len);
    }
    if (options->depth_grid) {
      opts.depth_grid.assign(options->depth_grid, options->depth_grid + options->depth_grid_len);
    }
    TrainOutcome outcome = train_and_evaluate(dataset->value, opts);
    char* report = report_out ? dup_string(format_train_report(outcome, options->json_report != 0)) : nullptr;
    if (model_out) {
      auto model = std::make_unique<dl_model>();
      model->value = std::make_shared<const RandomForestModel>(std::move(outcome.model));
      *model_out = model.release();
    }
    if (report_out) *report_out = report;
  });
}

dl_status dl_model_load(const char* path, dl_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    auto model = std::make_unique<dl_model>();
    model->value = std::make_shared<const RandomForestModel>(load_model(path));
    *out = model.release();
  });
}

dl_status dl_model_save(const dl_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "null argument");
    save_model(*model->value, path);
  });
}

void dl_model_free(dl_model* model) { delete model; }

dl_status dl_model_evaluate(const dl_model* model, const dl_dataset* dataset, int json_report,
                            char** report_out, double* accuracy_out) {
  return guarded([&] {
    require(model != nullptr && dataset != nullptr, "null argument");
    const Metrics metrics = evaluate(*model->value, dataset->value);
    if (accuracy_out) *accuracy_out = metrics.accuracy;
    if (report_out) {
      *report_out = dup_string(format_metrics_report(metrics, dataset->value.size(), json_report != 0));
    }
  });
}

dl_status dl_classify_stream(const dl_model* model, const dl_stream* stream, double gate_threshold,
                             size_t min_capture_len, dl_prediction* out) {
  return guarded([&] {
    require(model != nullptr && stream != nullptr && out != nullptr, "null argument");
    ClassifyOptions options;
    options.gate.threshold = gate_threshold;
    options.gate.min_capture_len = min_capture_len;
    const Prediction p = classify_stream(*model->value, stream->frames, options);
    out->label = to_char(p.label);
    for (size_t c = 0; c < DL_LABEL_COUNT; ++c) out->posteriors[c] = p.posteriors[c];
  });
}

void dl_paint_options_default(dl_paint_options* options) {
  if (!options) return;
  const PaintOptions d;
  *options = {{d.frame.center.x, d.frame.center.y, d.frame.center.z},
              d.frame.width,
              d.frame.height,
              d.speed,
              d.rate,
              d.gains.kp,
              d.gains.kd,
              d.gains.dt,
              d.image_width,
              d.image_height};
}

dl_status dl_paint_letter(char letter, const dl_paint_options* options, const char* out_path,
                          double* max_tracking_error_out) {
  return guarded([&] {
    require(out_path != nullptr, "out_path is null");
    const Label label = label_from(letter);
    PaintOptions opts;
    if (options) {
      opts.frame.center = {options->center[0], options->center[1], options->center[2]};
      opts.frame.width = options->width;
      opts.frame.height = options->height;
      opts.speed = options->speed;
      opts.rate = options->rate;
      opts.gains = {options->kp, options->kd, options->dt};
      opts.image_width = options->image_width;
      opts.image_height = options->image_height;
    }
    const PaintResult result = paint_letter(label, opts);
    save_image(result.image, out_path);
    if (max_tracking_error_out) *max_tracking_error_out = result.max_tracking_error;
  });
}

dl_status dl_server_create(const char* config_path, dl_server** out) {
  return guarded([&] {
    require(config_path != nullptr && out != nullptr, "null argument");
    const ServiceConfig config = ServiceConfig::load(config_path);
    if (config.model_path.empty()) throw Error(ErrorCode::kIo, "config has no model_path");
    auto model = std::make_shared<const RandomForestModel>(load_model(config.model_path));
    auto server = std::make_unique<dl_server>();
    server->value = std::make_unique<Server>(config, std::move(model));
    *out = server.release();
  });
}

dl_status dl_server_start(dl_server* server) {
  return guarded([&] {
    require(server != nullptr, "server is null");
    server->value->start();
  });
}

uint16_t dl_server_port(const dl_server* server) { return server ? server->value->port() : 0; }

dl_status dl_server_run(dl_server* server, int handle_signals) {
  return guarded([&] {
    require(server != nullptr, "server is null");
    server->value->run(handle_signals != 0);
  });
}

void dl_server_stop(dl_server* server) {
  if (server) server->value->stop();
}

void dl_server_free(dl_server* server) { delete server; }

}  // extern "C"
