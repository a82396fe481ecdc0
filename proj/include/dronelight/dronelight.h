/*
 * dronelight C API.
 *
 * Objects are opaque handles created by dl_*_create/load/generate functions
 * and released with the matching dl_*_free. Every fallible call returns a
 * dl_status; on failure a human-readable message for the calling thread is
 * available from dl_last_error_message() until the next failing call.
 * Strings returned through char** out-parameters are owned by the caller
 * and must be released with dl_string_free().
 */
#ifndef DRONELIGHT_DRONELIGHT_H_
#define DRONELIGHT_DRONELIGHT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DRONELIGHT_BUILDING_LIBRARY)
#    define DL_API __declspec(dllexport)
#  else
#    define DL_API __declspec(dllimport)
#  endif
#else
#  define DL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dl_status {
  DL_OK = 0,
  DL_ERR_INVALID_ARGUMENT = 1,
  DL_ERR_IO = 2,
  DL_ERR_FORMAT = 3,
  DL_ERR_NO_GESTURE = 4,
  DL_ERR_SIGNAL_TOO_SHORT = 5,
  DL_ERR_BAD_LENGTH = 6,
  DL_ERR_EMPTY_COUNTS = 7,
  DL_ERR_MISSING_CLASS = 8,
  DL_ERR_TOO_FEW_PER_CLASS = 9,
  DL_ERR_UNKNOWN_LABEL = 10,
  DL_ERR_FRAME_TOO_LOW = 11,
  DL_ERR_DIVERGENCE = 12,
  DL_ERR_PORT_IN_USE = 13,
  DL_ERR_INTERNAL = 99
} dl_status;

#define DL_LABEL_COUNT 5
#define DL_FEATURE_LEN 30

typedef struct dl_dataset dl_dataset;
typedef struct dl_model dl_model;
typedef struct dl_stream dl_stream;
typedef struct dl_server dl_server;

typedef struct dl_imu_frame {
  double t;
  double ax;
  double ay;
  double az;
  double flex;
} dl_imu_frame;

DL_API const char* dl_version(void);
DL_API const char* dl_status_name(dl_status status);
DL_API const char* dl_last_error_message(void);
DL_API void dl_string_free(char* text);

/* Canonical label order "SKOLJ". */
DL_API const char* dl_labels(void);

/* ---- synthetic streams and datasets ---------------------------------- */

typedef struct dl_synth_params {
  double sample_rate;
  double stroke_duration;
  double noise_sigma;
  double tilt_jitter;
  double letter_size;
  uint32_t lead_frames;
  uint64_t seed;
} dl_synth_params;

DL_API void dl_synth_params_default(dl_synth_params* params);

DL_API dl_status dl_stream_synthesize(char letter, const dl_synth_params* params, dl_stream** out);
DL_API dl_status dl_stream_create(const dl_imu_frame* frames, size_t count, dl_stream** out);
DL_API dl_status dl_stream_load(const char* path, dl_stream** out);
DL_API dl_status dl_stream_save(const dl_stream* stream, const char* path);
DL_API size_t dl_stream_size(const dl_stream* stream);
DL_API dl_status dl_stream_frame(const dl_stream* stream, size_t index, dl_imu_frame* out);
DL_API void dl_stream_free(dl_stream* stream);

DL_API dl_status dl_dataset_generate(size_t per_class, const dl_synth_params* params, dl_dataset** out);
DL_API dl_status dl_dataset_load(const char* path, dl_dataset** out);
DL_API dl_status dl_dataset_save(const dl_dataset* dataset, const char* path);
DL_API size_t dl_dataset_size(const dl_dataset* dataset);
DL_API void dl_dataset_class_counts(const dl_dataset* dataset, size_t counts[DL_LABEL_COUNT]);
DL_API void dl_dataset_free(dl_dataset* dataset);

/* ---- training and evaluation ----------------------------------------- */

typedef struct dl_train_options {
  size_t train_count;
  size_t test_count;
  size_t k;
  uint64_t seed;
  const size_t* trees_grid; /* NULL selects {50, 100, 200, 300} */
  size_t trees_grid_len;
  const size_t* depth_grid; /* NULL selects {2, 3, 4, 6} */
  size_t depth_grid_len;
  int json_report;
} dl_train_options;

DL_API void dl_train_options_default(dl_train_options* options);

/* Stratified split, grid search with k-fold CV, refit of the best config.
 * report_out (optional) receives the training report. */
DL_API dl_status dl_train(const dl_dataset* dataset, const dl_train_options* options,
                          dl_model** model_out, char** report_out);

DL_API dl_status dl_model_load(const char* path, dl_model** out);
DL_API dl_status dl_model_save(const dl_model* model, const char* path);
DL_API void dl_model_free(dl_model* model);

DL_API dl_status dl_model_evaluate(const dl_model* model, const dl_dataset* dataset, int json_report,
                                   char** report_out, double* accuracy_out);

typedef struct dl_prediction {
  char label;
  double posteriors[DL_LABEL_COUNT];
} dl_prediction;

/* Gates, featurizes and classifies a raw stream. DL_ERR_NO_GESTURE when no
 * clasp of at least min_capture_len frames exists. */
DL_API dl_status dl_classify_stream(const dl_model* model, const dl_stream* stream,
                                    double gate_threshold, size_t min_capture_len,
                                    dl_prediction* out);

/* ---- light painting --------------------------------------------------- */

typedef struct dl_paint_options {
  double center[3];
  double width;
  double height;
  double speed;
  double rate;
  double kp;
  double kd;
  double dt;
  size_t image_width;
  size_t image_height;
} dl_paint_options;

DL_API void dl_paint_options_default(dl_paint_options* options);

/* Glyph -> path -> simulated flight -> long-exposure PPM written to out_path. */
DL_API dl_status dl_paint_letter(char letter, const dl_paint_options* options, const char* out_path,
                                 double* max_tracking_error_out);

/* ---- service ------------------------------------------------------------ */

/* Reads the JSON config file and loads the model it names. */
DL_API dl_status dl_server_create(const char* config_path, dl_server** out);
/* Binds the listening socket. DL_ERR_PORT_IN_USE if taken. */
DL_API dl_status dl_server_start(dl_server* server);
DL_API uint16_t dl_server_port(const dl_server* server);
/* Blocks until dl_server_stop() or, with handle_signals, SIGINT/SIGTERM. */
DL_API dl_status dl_server_run(dl_server* server, int handle_signals);
/* Thread-safe. */
DL_API void dl_server_stop(dl_server* server);
DL_API void dl_server_free(dl_server* server);

#ifdef __cplusplus
}
#endif

#endif /* DRONELIGHT_DRONELIGHT_H_ */
