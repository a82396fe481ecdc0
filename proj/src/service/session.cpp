#include <boost/beast/core/detail/base64.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>

#include "dronelight/error.hpp"
#include "dronelight/pipeline.hpp"
#include "dronelight/service.hpp"
#include "json.hpp"

namespace dronelight {

namespace {

using nlohmann::json;

std::string base64(const std::string& bytes) {
  namespace b64 = boost::beast::detail::base64;
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

bool finite_number(const json& j, const char* key) {
  return j.contains(key) && j[key].is_number() && std::isfinite(j[key].get<double>());
}

std::string state_message(SessionMode mode) {
  return json{{"type", "state"}, {"mode", to_string(mode)}}.dump();
}

}  // namespace

const char* to_string(SessionMode mode) noexcept {
  switch (mode) {
    case SessionMode::kIdle: return "idle";
    case SessionMode::kCapturing: return "capturing";
    case SessionMode::kFlying: return "flying";
  }
  return "idle";
}

Session::Session(std::string id, ServiceConfig config,
                 std::shared_ptr<const RandomForestModel> model, MessageSink sink)
    : id_(std::move(id)), config_(std::move(config)), model_(std::move(model)), sink_(std::move(sink)) {
  config_.validate();
  if (!model_) throw Error(ErrorCode::kInvalidArgument, "session needs a model");
  transitions_.push_back(SessionMode::kIdle);
  emit(json{{"type", "state"}, {"mode", "idle"}, {"session", id_}}.dump());
}

Session::~Session() { abort("session closed"); }

SessionMode Session::mode() const {
  std::lock_guard lock(mutex_);
  return mode_;
}

std::vector<SessionMode> Session::transitions() const {
  std::lock_guard lock(mutex_);
  return transitions_;
}

void Session::emit_error(std::string_view code, std::string_view detail) const {
  emit(json{{"type", "error"}, {"code", code}, {"detail", detail}}.dump());
}

void Session::set_mode_locked(SessionMode mode) {
  mode_ = mode;
  transitions_.push_back(mode);
  emit(state_message(mode));
}

void Session::handle_text(std::string_view text) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error&) {
    emit_error("bad_frame", "message is not valid JSON");
    return;
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    emit_error("bad_frame", "message must be an object with a string \"type\"");
    return;
  }
  const std::string type = msg["type"].get<std::string>();
  if (type == "imu") {
    for (const char* key : {"t", "ax", "ay", "az", "flex"}) {
      if (!finite_number(msg, key)) {
        emit_error("bad_frame", std::string("imu field \"") + key + "\" must be a finite number");
        return;
      }
    }
    ImuFrame frame;
    frame.t = msg["t"].get<double>();
    frame.accel = {msg["ax"].get<double>(), msg["ay"].get<double>(), msg["az"].get<double>()};
    frame.flex = msg["flex"].get<double>();
    handle_frame(frame);
  } else if (type == "config") {
    apply_config(std::string(text));
  } else {
    emit_error("unknown_type", "unknown message type \"" + type + "\"");
  }
}

void Session::apply_config(const std::string& text) {
  std::lock_guard lock(mutex_);
  if (mode_ != SessionMode::kIdle) {
    emit_error("busy", "config is only accepted while idle");
    return;
  }
  const json msg = json::parse(text);
  ServiceConfig next = config_;
  try {
    for (const auto& [key, value] : msg.items()) {
      if (key == "type") continue;
      if (key == "gate_threshold") next.gate_threshold = value.get<double>();
      else if (key == "min_capture_len") next.min_capture_len = value.get<std::size_t>();
      else if (key == "time_scale") next.time_scale = value.get<double>();
      else if (key == "speed") next.speed = value.get<double>();
      else if (key == "paint_mode") {
        const auto mode = value.get<std::string>();
        if (mode == "inline") next.paint_mode = PaintDelivery::kInline;
        else if (mode == "path") next.paint_mode = PaintDelivery::kPath;
        else throw Error(ErrorCode::kInvalidArgument, "paint_mode must be inline or path");
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unsupported config key \"" + key + "\"");
      }
    }
    next.validate();
  } catch (const std::exception& e) {
    emit_error("bad_config", e.what());
    return;
  }
  config_ = std::move(next);
  emit(state_message(mode_));
}

void Session::handle_frame(const ImuFrame& frame) {
  std::unique_lock lock(mutex_);
  if (mode_ == SessionMode::kFlying) return;

  if (frame.flex < 0.0 || frame.flex > 1.0 || frame.t < 0.0) {
    emit_error("bad_frame", "flex must be in [0, 1] and t non-negative");
    return;
  }
  if (have_last_t_ && !(frame.t > last_t_)) {
    emit_error("bad_frame", "timestamp is not increasing");
    return;
  }
  have_last_t_ = true;
  last_t_ = frame.t;

  const bool clasped = frame.flex >= config_.gate_threshold;
  if (mode_ == SessionMode::kIdle) {
    if (!clasped) return;
    buffer_.clear();
    buffer_.push_back(frame);
    set_mode_locked(SessionMode::kCapturing);
    if (buffer_.size() >= config_.buffer_cap) finalize_capture_locked();
    return;
  }
  if (clasped) {
    buffer_.push_back(frame);
    if (buffer_.size() >= config_.buffer_cap) finalize_capture_locked();
    return;
  }
  finalize_capture_locked();
}

void Session::finalize_capture_locked() {
  std::vector<ImuFrame> frames = std::move(buffer_);
  buffer_.clear();
  if (frames.size() < config_.min_capture_len) {
    emit_error("capture_too_short", "captured " + std::to_string(frames.size()) +
                                        " frames, need " + std::to_string(config_.min_capture_len));
    set_mode_locked(SessionMode::kIdle);
    return;
  }

  Prediction prediction;
  try {
    GestureCapture capture{std::move(frames), id_};
    prediction = model_->predict(featurize(capture, config_.filter));
  } catch (const Error& e) {
    emit_error(to_string(e.code()), e.what());
    set_mode_locked(SessionMode::kIdle);
    return;
  }
  emit(json{{"type", "prediction"},
            {"label", std::string(to_string(prediction.label))},
            {"posteriors", prediction.posteriors}}
           .dump());
  set_mode_locked(SessionMode::kFlying);

  // A previous flight thread has already left its last critical section.
  if (flight_.joinable()) flight_.join();
  abort_ = false;
  const std::uint64_t job = ++paint_count_;
  flight_ = std::thread([this, label = prediction.label, job] { run_flight(label, job); });
}

bool Session::sleep_or_abort(double seconds) {
  std::unique_lock lock(mutex_);
  if (seconds > 0.0) {
    wake_.wait_for(lock, std::chrono::duration<double>(seconds), [this] { return abort_; });
  }
  return abort_;
}

void Session::run_flight(Label label, std::uint64_t job) {
  ServiceConfig cfg;
  {
    std::lock_guard lock(mutex_);
    cfg = config_;
  }
  auto finish = [this](const std::string& last_message) {
    std::lock_guard lock(mutex_);
    if (!last_message.empty()) emit(last_message);
    set_mode_locked(SessionMode::kIdle);
  };

  try {
    PaintOptions options;
    options.frame = cfg.frame;
    options.speed = cfg.speed;
    options.rate = cfg.rate;
    options.gains = cfg.gains;
    options.image_width = cfg.image_width;
    options.image_height = cfg.image_height;
    const PaintResult paint = paint_letter(label, options);

    const auto stride = static_cast<std::size_t>(
        std::max(1L, std::lround(1.0 / (cfg.telemetry_rate * paint.trace.dt))));
    const double pause = static_cast<double>(stride) * paint.trace.dt * cfg.time_scale;
    for (std::size_t k = 0; k < paint.trace.states.size(); k += stride) {
      if (sleep_or_abort(k == 0 ? 0.0 : pause)) {
        std::string reason;
        {
          std::lock_guard lock(mutex_);
          reason = abort_reason_;
        }
        finish(json{{"type", "error"}, {"code", "aborted"}, {"detail", reason}}.dump());
        return;
      }
      const DroneState& s = paint.trace.states[k];
      emit(json{{"type", "drone_state"},
                {"t", s.t},
                {"x", s.position.x},
                {"y", s.position.y},
                {"z", s.position.z},
                {"led", {s.led.r, s.led.g, s.led.b}},
                {"lit", s.lit}}
               .dump());
    }

    const std::string ppm = encode_ppm(paint.image);
    json done = {{"type", "paint_done"},
                 {"label", std::string(to_string(label))},
                 {"width", paint.image.width},
                 {"height", paint.image.height},
                 {"max_tracking_error", paint.max_tracking_error}};
    if (cfg.paint_mode == PaintDelivery::kInline) {
      done["encoding"] = "ppm-base64";
      done["data"] = base64(ppm);
    } else {
      const auto path = std::filesystem::path(cfg.paint_dir) /
                        (id_ + "_" + std::to_string(job) + "_" + std::string(to_string(label)) + ".ppm");
      save_image(paint.image, path.string());
      done["encoding"] = "path";
      done["path"] = path.string();
    }
    finish(done.dump());
  } catch (const Error& e) {
    finish(json{{"type", "error"}, {"code", "flight_failed"}, {"detail", e.what()}}.dump());
  } catch (const std::exception& e) {
    finish(json{{"type", "error"}, {"code", "internal"}, {"detail", e.what()}}.dump());
  }
}

void Session::abort(const std::string& reason) {
  {
    std::lock_guard lock(mutex_);
    abort_ = true;
    abort_reason_ = reason;
    if (mode_ == SessionMode::kCapturing) {
      buffer_.clear();
      set_mode_locked(SessionMode::kIdle);
    }
  }
  wake_.notify_all();
  if (flight_.joinable()) flight_.join();
  std::lock_guard lock(mutex_);
  abort_ = false;
}

void Session::wait_idle() {
  if (flight_.joinable()) flight_.join();
}

}  // namespace dronelight
