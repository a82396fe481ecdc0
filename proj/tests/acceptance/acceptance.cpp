// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit if any
// fails. Set DRONELIGHT_UPDATE_GOLDENS=1 to rewrite the golden paintings.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "dronelight/forest.hpp"
#include "dronelight/pipeline.hpp"
#include "dronelight/service.hpp"
#include "dronelight/signal.hpp"
#include "dronelight/simflight.hpp"
#include "dronelight/synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "ws_client.hpp"

using namespace dronelight;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const Dataset& corpus() {
  static const Dataset ds = gen_dataset(25, SynthParams{});
  return ds;
}

Outcome grid_protocol() {
  const auto start = std::chrono::steady_clock::now();
  const auto outcome = train_and_evaluate(corpus(), TrainOptions{});
  const auto text = format_train_report(outcome, false);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  // Sum the printed confusion matrix rows.
  std::istringstream in(text.substr(text.find("confusion matrix")));
  std::string line;
  std::getline(in, line);  // title
  std::getline(in, line);  // column header
  std::size_t rows = 0;
  unsigned long cell_sum = 0;
  while (std::getline(in, line) && rows < 5) {
    std::istringstream row(line);
    std::string label;
    row >> label;
    std::size_t cells = 0;
    for (unsigned long v; row >> v; ++cells) cell_sum += v;
    if (cells != 5) return {false, "confusion row with " + std::to_string(cells) + " cells"};
    ++rows;
  }
  const bool configs_ok = outcome.grid.scores.size() == 16 && text.find("configs scored: 16") != std::string::npos;
  const bool pass = configs_ok && rows == 5 && cell_sum == 50 && seconds < 60.0;
  return {pass, fmt("configs=%zu confusion=%zux5 sum=%lu runtime=%.1fs (need 16, 5x5, 50, <60s)",
                    outcome.grid.scores.size(), rows, cell_sum, seconds)};
}

Outcome desk_accuracy() {
  const auto outcome = train_and_evaluate(corpus(), TrainOptions{});
  const auto& m = outcome.test_metrics;
  const double min_recall = *std::min_element(m.recall.begin(), m.recall.end());
  return {m.accuracy >= 0.90 && min_recall >= 0.80,
          fmt("best n_trees=%zu max_depth=%zu test accuracy=%.4f min recall=%.4f (need >=0.90, >=0.80)",
              outcome.grid.best().n_trees, outcome.grid.best().max_depth, m.accuracy, min_recall)};
}

Outcome classifier_oracles() {
  std::mt19937_64 gen(20240601);
  std::size_t split_agree = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 11;
    const std::size_t nf = 1 + gen() % 3;
    FeatureMatrix m;
    m.n_features = nf;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> r(nf);
      for (auto& v : r) v = static_cast<double>(gen() % 7) * 0.5;
      const int label = static_cast<int>(gen() % 5);
      m.add_row(r, kAllLabels[static_cast<std::size_t>(label)]);
      rows.push_back(r);
      labels.push_back(label);
    }
    std::vector<std::size_t> all(n), features(nf);
    std::iota(all.begin(), all.end(), 0);
    std::iota(features.begin(), features.end(), 0);
    const auto got = best_split(m, all, features);
    const auto want = oracle::best_split(rows, labels);
    const bool same = got.has_value() == want.has_value() &&
                      (!got || (got->feature == want->feature && got->threshold == want->threshold &&
                                std::abs(got->decrease - want->decrease) < 1e-12));
    split_agree += same ? 1 : 0;
  }
  std::size_t gini_agree = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    ClassCounts c{};
    std::array<unsigned, 5> o{};
    do {
      for (std::size_t i = 0; i < 5; ++i) o[i] = c[i] = static_cast<std::uint32_t>(gen() % 50);
    } while (std::accumulate(o.begin(), o.end(), 0u) == 0);
    const double d = std::abs(gini(c) - oracle::gini(o));
    worst = std::max(worst, d);
    gini_agree += d <= 1e-12 ? 1 : 0;
  }
  return {split_agree == 200 && gini_agree == 1000,
          fmt("best_split %zu/200 match brute force; gini %zu/1000 within 1e-12 (max diff %.1e)", split_agree,
              gini_agree, worst)};
}

Outcome zero_phase_filter() {
  const FilterSpec spec;
  const std::vector<double> constant(40, 2.5);
  double const_err = 0.0;
  for (double v : filtfilt(constant, spec)) const_err = std::max(const_err, std::abs(v - 2.5));

  int zero_lag = 0;
  for (double period : {16.0, 32.0, 64.0}) {
    std::vector<double> x(64);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period);
    const auto y = filtfilt(x, spec);
    int best_lag = 0;
    double best = -1e300;
    for (int lag = -20; lag <= 20; ++lag) {
      double r = 0.0;
      for (int n = 0; n < 64; ++n) {
        if (n - lag >= 0 && n - lag < 64) r += y[static_cast<std::size_t>(n)] * x[static_cast<std::size_t>(n - lag)];
      }
      if (r > best) best = r, best_lag = lag;
    }
    zero_lag += best_lag == 0 ? 1 : 0;
  }

  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  double oracle_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(50);
    for (auto& v : x) v = u(gen);
    const auto y = filtfilt(x, spec);
    const auto want = oracle::filtfilt(oracle::butter2(spec.cutoff_ratio), x, 6);
    for (std::size_t i = 0; i < y.size(); ++i) oracle_err = std::max(oracle_err, std::abs(y[i] - want[i]));
  }
  return {const_err <= 1e-9 && zero_lag == 3 && oracle_err <= 1e-9,
          fmt("constant err %.1e; zero-lag %d/3 sines; oracle max diff %.1e over 50 signals (need <=1e-9)",
              const_err, zero_lag, oracle_err)};
}

Outcome stratified_folds() {
  Dataset ds;
  for (Label l : kAllLabels) {
    for (int i = 0; i < 15; ++i) {
      LabeledSample s;
      s.label = l;
      ds.add(s);
    }
  }
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto folds = stratified_kfold(ds, 5, mix_seed(seed, 99));
    bool ok = folds.size() == 5;
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& fold : folds) {
      ClassCounts c{};
      for (auto i : fold) ++c[index_of(ds[i].label)];
      for (auto v : c) ok = ok && v == 3;
      seen.insert(fold.begin(), fold.end());
      total += fold.size();
    }
    ok = ok && seen.size() == 75 && total == 75;
    good += ok ? 1 : 0;
  }
  return {good == 100, fmt("%d/100 trials: 5 folds x 3 per class, disjoint and covering", good)};
}

Outcome simulator() {
  DroneState s;
  const ControllerGains gains;
  for (int k = 0; k < 300; ++k) s = step(s, {1.0, 0.0, 0.0}, gains);
  const double step_err = std::abs(s.position.x - (1.0 - 7.0 * std::exp(-6.0)));

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst_increase = -1e300;
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 sp{u(gen), u(gen), u(gen)};
    DroneState d;
    d.position = {u(gen), u(gen), u(gen)};
    d.velocity = {u(gen), u(gen), u(gen)};
    d = step(d, sp, gains);
    auto v = [&](const DroneState& x) {
      const Vec3 e = x.position - sp;
      return gains.kp * e.dot(e) + x.velocity.dot(x.velocity);
    };
    double prev = v(d);
    for (int k = 0; k < 1000; ++k) {
      d = step(d, sp, gains);
      worst_increase = std::max(worst_increase, v(d) - prev);
      prev = v(d);
    }
  }

  std::string letters;
  bool tracking_ok = true;
  for (Label l : kAllLabels) {
    const auto path = letter_path(l, PaintFrame{});
    const auto trace = fly_path(path);  // throws on divergence
    const double err = max_tracking_error(path, trace);
    tracking_ok = tracking_ok && err < 0.15;
    letters += fmt(" %c=%.3f", to_char(l), err);
  }
  return {step_err < 0.01 && worst_increase <= 1e-9 && tracking_ok,
          fmt("step err %.4f (<0.01); max Lyapunov increase %.1e (<=1e-9); tracking m:", step_err, worst_increase) +
              letters + " (<0.15)"};
}

Outcome light_painting() {
  const CanvasParams params;
  const auto o = paint_letter(Label::O);
  const auto canvas = render_exposure(o.trace, params);
  const auto [cx, cy] = project(params, params.frame.center);
  const double radius = 0.5 * static_cast<double>(params.width) / (1.0 + 2.0 * params.margin);
  double ring = 0.0, disc = 0.0;
  std::size_t n_ring = 0, n_disc = 0;
  for (std::size_t row = 0; row < canvas.height(); ++row) {
    for (std::size_t col = 0; col < canvas.width(); ++col) {
      const double d = std::hypot(static_cast<double>(col) - cx, static_cast<double>(row) - cy);
      const double v = canvas.at(row, col, 0) + canvas.at(row, col, 1) + canvas.at(row, col, 2);
      // the flown circle sits a few cm inside the glyph: band is R +- 10 %
      if (std::abs(d - radius) < 0.1 * radius) ring += v, ++n_ring;
      if (d < radius / 2.0) disc += v, ++n_disc;
    }
  }
  const double contrast_ring = ring / static_cast<double>(n_ring);
  const double contrast_disc = disc / static_cast<double>(n_disc);
  const bool annulus = contrast_ring > 10.0 * contrast_disc;

  const bool update = std::getenv("DRONELIGHT_UPDATE_GOLDENS") != nullptr;
  PaintOptions small;
  small.image_width = small.image_height = 128;
  std::size_t golden_ok = 0, stable = 0;
  std::string missing;
  for (Label l : kAllLabels) {
    const std::string path = std::string(DRONELIGHT_GOLDEN_DIR) + "/" + std::string(to_string(l)) + ".ppm";
    const auto text = encode_ppm(paint_letter(l, small).image);
    if (update) {
      std::ofstream(path, std::ios::binary) << text;
    }
    const auto golden = slurp(path);
    if (golden.empty()) missing += to_string(l);
    golden_ok += golden == text ? 1 : 0;
    const bool same = encode_ppm(paint_letter(l).image) == encode_ppm(paint_letter(l).image);
    stable += same ? 1 : 0;
  }
  std::string detail = fmt("O ring/center %.1f/%.2f (>10x); golden 128px %zu/5 identical; 512px run-to-run %zu/5",
                           contrast_ring, contrast_disc, golden_ok, stable);
  if (!missing.empty()) detail += "; missing goldens " + missing;
  return {annulus && golden_ok == 5 && stable == 5, detail};
}

Outcome end_to_end() {
  Server server(fixtures::test_config(), fixtures::default_model());
  server.start();
  std::thread io([&] { server.run(); });
  std::string single, first, second;
  std::size_t drone_states = 0;
  try {
    {
      WsClient client(server.port());
      for (const auto& f : fixtures::letter_stream(Label::S, 7)) client.send(fixtures::imu_message(f));
      auto msgs = client.receive_until("paint_done");
      msgs.push_back(client.receive());
      for (const auto& m : msgs) drone_states += m["type"] == "drone_state" ? 1 : 0;
      single = fixtures::check_cycle(msgs, "S");
      client.close();
    }
    auto drive = [&](Label l, std::uint64_t seed, std::string& verdict) {
      WsClient client(server.port());
      for (const auto& f : fixtures::letter_stream(l, seed)) client.send(fixtures::imu_message(f));
      auto msgs = client.receive_until("paint_done");
      msgs.push_back(client.receive());
      verdict = fixtures::check_cycle(msgs, std::string(to_string(l)));
      for (const auto& m : msgs) {
        if (m["type"] == "paint_done" && m["label"] != std::string(to_string(l))) verdict = "foreign paint_done";
      }
      client.close();
    };
    std::thread a(drive, Label::S, 7, std::ref(first));
    std::thread b(drive, Label::K, 3, std::ref(second));
    a.join();
    b.join();
  } catch (...) {
    server.stop();
    io.join();
    throw;
  }
  server.stop();
  io.join();
  auto show = [](const std::string& v) { return v.empty() ? std::string("ok") : v; };
  return {single.empty() && drone_states >= 1 && first.empty() && second.empty(),
          fmt("S: prediction -> %zu drone_state -> paint_done: %s; concurrent S/K: %s/%s", drone_states,
              show(single).c_str(), show(first).c_str(), show(second).c_str())};
}

}  // namespace

int main() {
  report("grid-protocol", grid_protocol);
  report("desk-accuracy", desk_accuracy);
  report("classifier-oracles", classifier_oracles);
  report("zero-phase-filter", zero_phase_filter);
  report("stratified-folds", stratified_folds);
  report("simulator", simulator);
  report("light-painting", light_painting);
  report("end-to-end-headless", end_to_end);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
