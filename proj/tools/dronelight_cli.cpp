// dronelight command-line tool. Talks to the library through the C API only.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dronelight/dronelight.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitEnvironment = 1;
constexpr int kExitDomain = 2;

struct DatasetDeleter {
  void operator()(dl_dataset* p) const { dl_dataset_free(p); }
};
struct ModelDeleter {
  void operator()(dl_model* p) const { dl_model_free(p); }
};
struct StreamDeleter {
  void operator()(dl_stream* p) const { dl_stream_free(p); }
};
struct ServerDeleter {
  void operator()(dl_server* p) const { dl_server_free(p); }
};
struct StringDeleter {
  void operator()(char* p) const { dl_string_free(p); }
};
using DatasetPtr = std::unique_ptr<dl_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<dl_model, ModelDeleter>;
using StreamPtr = std::unique_ptr<dl_stream, StreamDeleter>;
using ServerPtr = std::unique_ptr<dl_server, ServerDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

// Thrown to unwind to main with the exit code for a failed C call.
struct Failure {
  int exit_code;
};

int exit_code_for(dl_status status) {
  switch (status) {
    case DL_OK: return kExitOk;
    case DL_ERR_IO:
    case DL_ERR_FORMAT:
    case DL_ERR_PORT_IN_USE:
    case DL_ERR_INTERNAL: return kExitEnvironment;
    default: return kExitDomain;
  }
}

void check(dl_status status) {
  if (status == DL_OK) return;
  std::cerr << "dronelight: " << dl_last_error_message() << "\n";
  throw Failure{exit_code_for(status)};
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stoul(item));
  return out;
}

std::string labels_line(const std::size_t counts[DL_LABEL_COUNT]) {
  std::string out;
  const char* labels = dl_labels();
  for (std::size_t c = 0; c < DL_LABEL_COUNT; ++c) {
    if (c > 0) out += ", ";
    out += labels[c];
    out += " " + std::to_string(counts[c]);
  }
  return out;
}

// Shared defaults from --config; explicit flags win.
struct SharedDefaults {
  json doc = json::object();

  template <typename T>
  void apply(CLI::Option* opt, T& target, const char* key) const {
    if (opt->count() == 0 && doc.contains(key)) target = doc[key].get<T>();
  }
};

SharedDefaults load_defaults(const std::string& path) {
  SharedDefaults d;
  if (path.empty()) return d;
  std::ifstream in(path);
  if (!in) {
    std::cerr << "dronelight: cannot open config '" << path << "'\n";
    throw Failure{kExitEnvironment};
  }
  try {
    d.doc = json::parse(in);
  } catch (const json::exception& e) {
    std::cerr << "dronelight: config '" << path << "': " << e.what() << "\n";
    throw Failure{kExitEnvironment};
  }
  return d;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) {
    std::cerr << "dronelight: cannot write '" << path << "'\n";
    throw Failure{kExitEnvironment};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dronelight: gesture-driven drone light painting"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with shared defaults (and the serve config)");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic labelled dataset (JSONL)");
  std::string gen_out;
  std::size_t per_class = 25;
  std::uint64_t gen_seed = 42;
  double noise_sigma = -1.0;
  std::string stream_letter;
  gen->add_option("--out", gen_out, "Output file")->required();
  auto* per_class_opt = gen->add_option("--per-class", per_class, "Samples per letter");
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Base seed");
  gen->add_option("--noise-sigma", noise_sigma, "Accelerometer noise, m/s^2");
  gen->add_option("--stream", stream_letter,
                  "Write one raw synthetic IMU stream for this letter instead of a dataset");

  // train
  auto* train = app.add_subcommand("train", "Grid-search, train and evaluate a random forest");
  std::string train_data, train_out, split = "75/50", trees = "50,100,200,300", depths = "2,3,4,6";
  std::string report_path;
  std::size_t k = 5;
  std::uint64_t train_seed = 42;
  bool train_json = false;
  train->add_option("--data", train_data, "Dataset file")->required();
  train->add_option("--out", train_out, "Model output file")->required();
  auto* split_opt = train->add_option(
      "--split", split, "Train/test counts, e.g. 75/50 (default: 75/50 of 125, else 60/40 of the data)");
  auto* k_opt = train->add_option("--k", k, "Folds for stratified cross-validation");
  auto* train_seed_opt = train->add_option("--seed", train_seed, "Seed for splits and forests");
  auto* trees_opt = train->add_option("--trees", trees, "Comma-separated n_trees grid");
  auto* depths_opt = train->add_option("--depths", depths, "Comma-separated max_depth grid");
  train->add_option("--report", report_path, "Also write the report to this file");
  train->add_flag("--json", train_json, "Emit the report as JSON");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Evaluate a model on a dataset");
  std::string eval_model, eval_data;
  bool eval_json = false;
  eval->add_option("--model", eval_model, "Model file")->required();
  eval->add_option("--data", eval_data, "Dataset file")->required();
  eval->add_flag("--json", eval_json, "Emit JSON");

  // paint
  auto* paint = app.add_subcommand("paint", "Simulate a light-painting flight and write a PPM");
  std::string letter, paint_out, paint_model, paint_input;
  std::size_t image_size = 512;
  double speed = 0.5;
  paint->add_option("--letter", letter, "Letter to paint (S, K, O, L, J)");
  paint->add_option("--out", paint_out, "Output PPM file")->required();
  paint->add_option("--model", paint_model, "Classify --input with this model and paint the result");
  paint->add_option("--input", paint_input, "IMU stream file (with --model)");
  auto* size_opt = paint->add_option("--size", image_size, "Image width and height in pixels");
  auto* speed_opt = paint->add_option("--speed", speed, "Painting speed, m/s");

  // classify
  auto* classify = app.add_subcommand("classify", "Classify a recorded IMU stream");
  std::string cls_model, cls_input;
  double threshold = 0.5;
  std::size_t min_capture_len = 12;
  bool cls_json = false;
  classify->add_option("--model", cls_model, "Model file")->required();
  classify->add_option("--input", cls_input, "IMU stream file (JSONL imu messages)")->required();
  auto* threshold_opt = classify->add_option("--threshold", threshold, "Flex gate threshold");
  auto* min_len_opt = classify->add_option("--min-capture-len", min_capture_len, "Minimum clasp frames");
  classify->add_flag("--json", cls_json, "Emit JSON");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the WebSocket service (needs --config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitDomain;
  }

  try {
    const SharedDefaults defaults = load_defaults(config_path);

    if (gen->parsed()) {
      defaults.apply(per_class_opt, per_class, "per_class");
      defaults.apply(gen_seed_opt, gen_seed, "seed");
      dl_synth_params params;
      dl_synth_params_default(&params);
      params.seed = gen_seed;
      if (noise_sigma >= 0.0) params.noise_sigma = noise_sigma;
      if (!stream_letter.empty()) {
        dl_stream* raw = nullptr;
        check(dl_stream_synthesize(stream_letter.size() == 1 ? stream_letter[0] : '?', &params, &raw));
        StreamPtr stream(raw);
        check(dl_stream_save(stream.get(), gen_out.c_str()));
        std::cout << "wrote " << dl_stream_size(stream.get()) << " frames of '" << stream_letter
                  << "' to " << gen_out << "\n";
        return kExitOk;
      }
      dl_dataset* raw = nullptr;
      check(dl_dataset_generate(per_class, &params, &raw));
      DatasetPtr ds(raw);
      check(dl_dataset_save(ds.get(), gen_out.c_str()));
      std::size_t counts[DL_LABEL_COUNT];
      dl_dataset_class_counts(ds.get(), counts);
      std::cout << "wrote " << dl_dataset_size(ds.get()) << " samples to " << gen_out << " ("
                << labels_line(counts) << ")\n";
      return kExitOk;
    }

    if (train->parsed()) {
      const bool split_given = split_opt->count() > 0 || defaults.doc.contains("split");
      defaults.apply(split_opt, split, "split");
      defaults.apply(k_opt, k, "k");
      defaults.apply(train_seed_opt, train_seed, "seed");
      defaults.apply(trees_opt, trees, "trees");
      defaults.apply(depths_opt, depths, "depths");
      dl_train_options options;
      dl_train_options_default(&options);
      std::vector<std::size_t> trees_grid, depth_grid;
      try {
        const auto slash = split.find('/');
        if (slash == std::string::npos) throw std::invalid_argument(split);
        options.train_count = std::stoul(split.substr(0, slash));
        options.test_count = std::stoul(split.substr(slash + 1));
        trees_grid = parse_list(trees);
        depth_grid = parse_list(depths);
      } catch (const std::exception&) {
        std::cerr << "dronelight: --split must look like 75/50 and grids like 50,100\n";
        return kExitDomain;
      }
      options.k = k;
      options.seed = train_seed;
      options.trees_grid = trees_grid.data();
      options.trees_grid_len = trees_grid.size();
      options.depth_grid = depth_grid.data();
      options.depth_grid_len = depth_grid.size();
      options.json_report = train_json ? 1 : 0;

      dl_dataset* raw_ds = nullptr;
      check(dl_dataset_load(train_data.c_str(), &raw_ds));
      DatasetPtr ds(raw_ds);
      if (!split_given) {
        const std::size_t n = dl_dataset_size(ds.get());
        options.train_count = (n * 3 + 2) / 5;
        options.test_count = n - options.train_count;
      }
      dl_model* raw_model = nullptr;
      char* raw_report = nullptr;
      check(dl_train(ds.get(), &options, &raw_model, &raw_report));
      ModelPtr model(raw_model);
      StringPtr report(raw_report);
      check(dl_model_save(model.get(), train_out.c_str()));
      std::cout << report.get();
      if (!report_path.empty()) write_text(report_path, report.get());
      return kExitOk;
    }

    if (eval->parsed()) {
      dl_model* raw_model = nullptr;
      check(dl_model_load(eval_model.c_str(), &raw_model));
      ModelPtr model(raw_model);
      dl_dataset* raw_ds = nullptr;
      check(dl_dataset_load(eval_data.c_str(), &raw_ds));
      DatasetPtr ds(raw_ds);
      char* raw_report = nullptr;
      check(dl_model_evaluate(model.get(), ds.get(), eval_json ? 1 : 0, &raw_report, nullptr));
      StringPtr report(raw_report);
      std::cout << report.get();
      return kExitOk;
    }

    if (paint->parsed()) {
      defaults.apply(speed_opt, speed, "speed");
      defaults.apply(size_opt, image_size, "image_size");
      char target = '\0';
      if (!paint_model.empty() || !paint_input.empty()) {
        if (paint_model.empty() || paint_input.empty() || !letter.empty()) {
          std::cerr << "dronelight: use either --letter or both --model and --input\n";
          return kExitDomain;
        }
        dl_model* raw_model = nullptr;
        check(dl_model_load(paint_model.c_str(), &raw_model));
        ModelPtr model(raw_model);
        dl_stream* raw_stream = nullptr;
        check(dl_stream_load(paint_input.c_str(), &raw_stream));
        StreamPtr stream(raw_stream);
        dl_prediction prediction;
        check(dl_classify_stream(model.get(), stream.get(), 0.5, 12, &prediction));
        target = prediction.label;
        std::cout << "recognized: " << target << "\n";
      } else if (letter.size() == 1) {
        target = letter[0];
      } else {
        std::cerr << "dronelight: unknown letter '" << letter << "' (valid letters: S, K, O, L, J)\n";
        return kExitDomain;
      }
      dl_paint_options options;
      dl_paint_options_default(&options);
      options.speed = speed;
      options.image_width = image_size;
      options.image_height = image_size;
      double max_error = 0.0;
      check(dl_paint_letter(target, &options, paint_out.c_str(), &max_error));
      char line[96];
      std::snprintf(line, sizeof line, "max tracking error: %.4f m\n", max_error);
      std::cout << "wrote " << paint_out << "\n" << line;
      return kExitOk;
    }

    if (classify->parsed()) {
      defaults.apply(threshold_opt, threshold, "gate_threshold");
      defaults.apply(min_len_opt, min_capture_len, "min_capture_len");
      dl_model* raw_model = nullptr;
      check(dl_model_load(cls_model.c_str(), &raw_model));
      ModelPtr model(raw_model);
      dl_stream* raw_stream = nullptr;
      check(dl_stream_load(cls_input.c_str(), &raw_stream));
      StreamPtr stream(raw_stream);
      dl_prediction prediction;
      check(dl_classify_stream(model.get(), stream.get(), threshold, min_capture_len, &prediction));
      const char* labels = dl_labels();
      if (cls_json) {
        json out = {{"label", std::string(1, prediction.label)},
                    {"posteriors", std::vector<double>(prediction.posteriors,
                                                       prediction.posteriors + DL_LABEL_COUNT)}};
        std::cout << out.dump() << "\n";
      } else {
        std::cout << prediction.label << "\n";
        std::cout << "posteriors:";
        char buf[32];
        for (std::size_t c = 0; c < DL_LABEL_COUNT; ++c) {
          std::snprintf(buf, sizeof buf, " %c=%.4f", labels[c], prediction.posteriors[c]);
          std::cout << buf;
        }
        std::cout << "\n";
      }
      return kExitOk;
    }

    if (serve->parsed()) {
      if (config_path.empty()) {
        std::cerr << "dronelight: serve needs --config\n";
        return kExitDomain;
      }
      dl_server* raw = nullptr;
      check(dl_server_create(config_path.c_str(), &raw));
      ServerPtr server(raw);
      check(dl_server_start(server.get()));
      std::cerr << "dronelight: listening on port " << dl_server_port(server.get()) << "\n";
      check(dl_server_run(server.get(), 1));
      return kExitOk;
    }
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return kExitDomain;
}
