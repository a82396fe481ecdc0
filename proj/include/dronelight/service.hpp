#pragma once

// Real-time gesture -> prediction -> light-painting service over WebSocket.

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dronelight/forest.hpp"
#include "dronelight/glyph.hpp"
#include "dronelight/signal.hpp"
#include "dronelight/simflight.hpp"

namespace dronelight {

enum class PaintDelivery { kInline, kPath };

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  std::uint16_t port = 8765;  // 0 picks an ephemeral port
  std::string model_path;
  double gate_threshold = kDefaultGateThreshold;
  std::size_t min_capture_len = kDefaultMinCaptureLen;
  std::size_t buffer_cap = 2000;
  FilterSpec filter;
  PaintFrame frame;
  ControllerGains gains;
  double speed = kDefaultPaintSpeed;
  double rate = kDefaultSetpointRate;
  double telemetry_rate = 10.0;  // drone_state messages per simulated second
  double time_scale = 1.0;       // wall seconds per simulated second; 0 = no pacing
  PaintDelivery paint_mode = PaintDelivery::kInline;
  std::string paint_dir = ".";
  std::size_t image_width = 512;
  std::size_t image_height = 512;

  void validate() const;
  /// Keys: port, bind_address, model_path, gate_threshold, min_capture_len,
  /// buffer_cap, frame {center:[x,y,z], width, height}, gains {kp, kd, dt},
  /// speed, rate, telemetry_rate, time_scale, paint_mode ("inline"|"path"),
  /// paint_dir, image {width, height}, filter {order, cutoff_ratio, pad_len}.
  static ServiceConfig from_json(std::string_view text);
  static ServiceConfig load(const std::string& path);
};

enum class SessionMode { kIdle, kCapturing, kFlying };

const char* to_string(SessionMode mode) noexcept;

/// Receives serialized JSON messages. Called from the ingest thread and from
/// the session's flight thread; implementations must be thread-safe.
using MessageSink = std::function<void(std::string)>;

/// One client's pipeline: imu frames drive idle -> capturing -> flying ->
/// idle. The flight runs on its own thread so ingestion never blocks.
class Session {
 public:
  Session(std::string id, ServiceConfig config, std::shared_ptr<const RandomForestModel> model,
          MessageSink sink);
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Parses one client message and reacts. Never throws for bad input;
  /// errors are reported to the sink.
  void handle_text(std::string_view text);
  void handle_frame(const ImuFrame& frame);

  /// Stops any running flight, reporting `reason` as an error, and waits for
  /// the flight thread.
  void abort(const std::string& reason);
  /// Blocks until no flight is running.
  void wait_idle();

  const std::string& id() const noexcept { return id_; }
  SessionMode mode() const;
  /// Every mode entered, starting with the initial idle.
  std::vector<SessionMode> transitions() const;

 private:
  void emit(const std::string& text) const { sink_(text); }
  void emit_error(std::string_view code, std::string_view detail) const;
  void set_mode_locked(SessionMode mode);
  void apply_config(const std::string& text);
  void finalize_capture_locked();
  void run_flight(Label label, std::uint64_t job);
  bool sleep_or_abort(double seconds);

  std::string id_;
  ServiceConfig config_;
  std::shared_ptr<const RandomForestModel> model_;
  MessageSink sink_;

  mutable std::mutex mutex_;
  std::condition_variable wake_;
  SessionMode mode_ = SessionMode::kIdle;
  std::vector<SessionMode> transitions_;
  std::vector<ImuFrame> buffer_;
  bool have_last_t_ = false;
  double last_t_ = 0.0;
  bool abort_ = false;
  std::string abort_reason_;
  std::uint64_t paint_count_ = 0;
  std::thread flight_;
};

/// Accepts RFC 6455 connections, one Session per connection, JSON text
/// frames in both directions.
class Server {
 public:
  Server(ServiceConfig config, std::shared_ptr<const RandomForestModel> model);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and listens. Throws Error(kPortInUse) if the port is taken.
  void start();
  /// Actual listening port (after start).
  std::uint16_t port() const;
  /// Serves until stop() (or SIGINT/SIGTERM when handle_signals is set).
  void run(bool handle_signals = false);
  /// Thread-safe. Aborts running flights with an error, closes sessions.
  void stop();
  std::size_t active_sessions() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Loads the model named in config, starts the server and serves until a
/// shutdown signal. Throws Error for startup failures.
void run_server(const ServiceConfig& config);

}  // namespace dronelight
