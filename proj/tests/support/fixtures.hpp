#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dronelight/forest.hpp"
#include "dronelight/service.hpp"
#include "dronelight/synth.hpp"
#include "json.hpp"

namespace fixtures {

// Forest trained on the default synthetic corpus with the paper's chosen
// configuration (100 trees, depth 3).
inline std::shared_ptr<const dronelight::RandomForestModel> default_model() {
  static const auto model = [] {
    dronelight::ForestParams p;
    p.n_trees = 100;
    p.max_depth = 3;
    return std::make_shared<const dronelight::RandomForestModel>(
        dronelight::forest_fit(dronelight::gen_dataset(25, dronelight::SynthParams{}), p));
  }();
  return model;
}

inline std::vector<dronelight::ImuFrame> letter_stream(dronelight::Label label, std::uint64_t seed) {
  dronelight::SynthParams p;
  p.seed = seed;
  return dronelight::synth_gesture(label, p);
}

inline std::string imu_message(const dronelight::ImuFrame& f) {
  return nlohmann::json{{"type", "imu"}, {"t", f.t},         {"ax", f.accel[0]},
                        {"ay", f.accel[1]}, {"az", f.accel[2]}, {"flex", f.flex}}
      .dump();
}

// Fast, small service config for tests: no pacing, 64x64 images.
inline dronelight::ServiceConfig test_config() {
  dronelight::ServiceConfig c;
  c.port = 0;
  c.time_scale = 0.0;
  c.image_width = 64;
  c.image_height = 64;
  return c;
}

// Thread-safe message collector usable as a MessageSink.
class Inbox {
 public:
  dronelight::MessageSink sink() {
    return [this](std::string text) {
      std::lock_guard lock(mutex_);
      messages_.push_back(nlohmann::json::parse(text));
    };
  }
  std::vector<nlohmann::json> messages() const {
    std::lock_guard lock(mutex_);
    return messages_;
  }

 private:
  mutable std::mutex mutex_;
  std::vector<nlohmann::json> messages_;
};

// Types of the messages in order, e.g. {"state", "prediction", ...}.
inline std::vector<std::string> types(const std::vector<nlohmann::json>& messages) {
  std::vector<std::string> out;
  for (const auto& m : messages) out.push_back(m.at("type").get<std::string>());
  return out;
}

// Checks the ordering contract for one session: prediction before any
// drone_state, at least one drone_state, paint_done last before the
// return to idle. Returns an empty string when it holds.
inline std::string check_cycle(const std::vector<nlohmann::json>& messages, const std::string& label) {
  std::size_t i = 0;
  auto next_type = [&](const std::string& type) {
    while (i < messages.size() && messages[i].at("type") != type) {
      if (messages[i].at("type") == "drone_state" || messages[i].at("type") == "paint_done") return false;
      ++i;
    }
    return i < messages.size();
  };
  if (!next_type("prediction")) return "no prediction before telemetry";
  if (messages[i].at("label") != label) return "predicted " + messages[i].at("label").get<std::string>();
  ++i;
  std::size_t drone_states = 0;
  for (; i < messages.size() && messages[i].at("type") != "paint_done"; ++i) {
    const auto& type = messages[i].at("type");
    if (type == "drone_state") {
      ++drone_states;
    } else if (type != "state") {
      return "unexpected " + type.get<std::string>() + " during flight";
    }
  }
  if (drone_states == 0) return "no drone_state";
  if (i == messages.size()) return "no paint_done";
  ++i;
  if (i == messages.size() || messages[i].at("type") != "state" || messages[i].at("mode") != "idle") {
    return "paint_done not followed by idle";
  }
  return {};
}

}  // namespace fixtures
