#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dronelight/error.hpp"
#include "dronelight/signal.hpp"
#include "dronelight/synth.hpp"
#include "oracles.hpp"

using namespace dronelight;

namespace {

std::vector<ImuFrame> flex_stream(const std::vector<double>& flex) {
  std::vector<ImuFrame> out;
  for (std::size_t i = 0; i < flex.size(); ++i) {
    out.push_back(ImuFrame{0.02 * static_cast<double>(i), {static_cast<double>(i), 0.0, 9.81}, flex[i]});
  }
  return out;
}

std::vector<double> random_signal(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> x(n);
  for (auto& v : x) v = u(gen);
  return x;
}

// Index of the first frame of a capture within its source stream.
double first_index(const GestureCapture& c) { return c.frames.front().accel[0]; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace

TEST_SUITE("signal") {

TEST_CASE("gate picks the only qualifying run") {
  const auto s = flex_stream({0, 0, 1, 1, 1, 0});
  const auto c = gate_capture(s, 0.5, 3);
  CHECK(c.frames.size() == 3);
  CHECK(first_index(c) == 2);
}

TEST_CASE("gate with nothing clasped") {
  const auto s = flex_stream({0.1, 0.2, 0.3});
  CHECK(code_of([&] { gate_capture(s, 0.5, 1); }) == ErrorCode::kNoGesture);
}

TEST_CASE("gate rejects runs shorter than min_capture_len") {
  const auto s = flex_stream({0, 1, 1, 1, 1, 1, 0});
  CHECK(code_of([&] { gate_capture(s, 0.5, 12); }) == ErrorCode::kNoGesture);
}

TEST_CASE("gate picks the longest run") {
  const auto s = flex_stream({1, 1, 0, 1, 1, 1});
  const auto c = gate_capture(s, 0.5, 2);
  CHECK(c.frames.size() == 3);
  CHECK(first_index(c) == 3);
}

TEST_CASE("gate agrees with an exhaustive run scan and is idempotent") {
  std::mt19937_64 gen(11);
  std::bernoulli_distribution clasp(0.6);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> flex(1 + gen() % 40);
    for (auto& f : flex) f = clasp(gen) ? 1.0 : 0.0;
    const auto s = flex_stream(flex);

    // every run as (start, length); longest wins, earliest on ties
    std::size_t best_start = 0, best_len = 0;
    for (std::size_t i = 0; i < flex.size(); ++i) {
      std::size_t j = i;
      while (j < flex.size() && flex[j] >= 0.5) ++j;
      if (j - i > best_len) best_start = i, best_len = j - i;
    }
    const std::size_t min_len = 1 + gen() % 5;
    if (best_len < min_len) {
      CHECK(code_of([&] { gate_capture(s, 0.5, min_len); }) == ErrorCode::kNoGesture);
      continue;
    }
    const auto c = gate_capture(s, 0.5, min_len);
    REQUIRE(c.frames.size() == best_len);
    CHECK(first_index(c) == static_cast<double>(best_start));
    const auto again = gate_capture(c.frames, 0.5, min_len);
    CHECK(again.frames == c.frames);
  }
}

TEST_CASE("butterworth coefficients") {
  const auto f = butterworth_lowpass(2, 0.2);
  REQUIRE(f.b.size() == 3);
  REQUIRE(f.a.size() == 3);
  const auto closed = oracle::butter2(0.2);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(f.b[i] == doctest::Approx(oracle::kScipyB[i]).epsilon(1e-12));
    CHECK(f.a[i] == doctest::Approx(oracle::kScipyA[i]).epsilon(1e-12));
    CHECK(std::abs(closed.b[i] - oracle::kScipyB[i]) < 1e-12);
    CHECK(std::abs(closed.a[i] - oracle::kScipyA[i]) < 1e-12);
  }
  for (int order = 1; order <= 6; ++order) {
    for (double wc : {0.05, 0.2, 0.5, 0.9}) {
      const auto g = butterworth_lowpass(order, wc);
      double sb = 0.0, sa = 0.0;
      for (double v : g.b) sb += v;
      for (double v : g.a) sa += v;
      CHECK(std::abs(sb / sa - 1.0) < 1e-9);
      CHECK(g.a[0] == 1.0);
    }
  }
}

TEST_CASE("filter spec validation") {
  CHECK(code_of([] { FilterSpec{0, 0.2, 6}.validate(); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { FilterSpec{2, 1.0, 6}.validate(); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { FilterSpec{2, 0.0, 6}.validate(); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("filtfilt keeps a constant") {
  const std::vector<double> x(40, 2.5);
  const auto y = filtfilt(x, FilterSpec{});
  REQUIRE(y.size() == 40);
  for (double v : y) CHECK(std::abs(v - 2.5) < 1e-9);
}

TEST_CASE("filtfilt is too short at pad length") {
  const std::vector<double> x(6, 1.0);
  CHECK(code_of([&] { filtfilt(x, FilterSpec{}); }) == ErrorCode::kSignalTooShort);
  const std::vector<double> ok(7, 1.0);
  CHECK(filtfilt(ok, FilterSpec{}).size() == 7);
}

TEST_CASE("filtfilt has zero lag on sines") {
  for (double period : {16.0, 32.0, 64.0}) {
    std::vector<double> x(64);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period);
    const auto y = filtfilt(x, FilterSpec{});
    int best_lag = 1000;
    double best = -1e300;
    for (int lag = -20; lag <= 20; ++lag) {
      double r = 0.0;
      for (int n = 0; n < 64; ++n) {
        const int m = n - lag;
        if (m >= 0 && m < 64) r += y[static_cast<std::size_t>(n)] * x[static_cast<std::size_t>(m)];
      }
      if (r > best) best = r, best_lag = lag;
    }
    CAPTURE(period);
    CHECK(best_lag == 0);
  }
}

TEST_CASE("filtfilt matches the difference-equation oracle") {
  std::mt19937_64 gen(2024);
  const auto f = oracle::butter2(0.2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_signal(gen, 50);
    const auto y = filtfilt(x, FilterSpec{});
    const auto expect = oracle::filtfilt(f, x, 6);
    REQUIRE(y.size() == expect.size());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y[i] - expect[i]) < 1e-9);
  }
}

TEST_CASE("filtfilt is time-reversal symmetric away from the edges") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = random_signal(gen, 600);
    const auto y = filtfilt(x, FilterSpec{});
    std::reverse(x.begin(), x.end());
    auto yr = filtfilt(x, FilterSpec{});
    std::reverse(yr.begin(), yr.end());
    for (std::size_t i = 100; i + 100 < y.size(); ++i) CHECK(std::abs(y[i] - yr[i]) < 1e-9);
  }
}

TEST_CASE("resample examples") {
  const std::vector<double> ramp = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(resample(ramp, 10) == ramp);
  const std::vector<double> two = {0, 9};
  const auto up = resample(two, 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(up[i] == doctest::Approx(static_cast<double>(i)).epsilon(1e-12));
  const auto down = resample(ramp, 5);
  const std::vector<double> expect = {0, 2.25, 4.5, 6.75, 9};
  for (std::size_t i = 0; i < 5; ++i) CHECK(down[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("resample rejects bad lengths") {
  const std::vector<double> one = {1.0};
  const std::vector<double> two = {1.0, 2.0};
  CHECK(code_of([&] { resample(one, 10); }) == ErrorCode::kBadLength);
  CHECK(code_of([&] { resample(two, 1); }) == ErrorCode::kBadLength);
}

TEST_CASE("resample keeps endpoints, is monotone and matches the oracle") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> step(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(2 + gen() % 60);
    double v = step(gen) - 10.0;
    for (auto& e : x) e = (v += step(gen));
    const std::size_t n = 2 + gen() % 40;
    const auto y = resample(x, n);
    REQUIRE(y.size() == n);
    CHECK(y.front() == x.front());
    CHECK(y.back() == x.back());
    for (std::size_t i = 1; i < n; ++i) CHECK(y[i] >= y[i - 1]);
    const auto expect = oracle::resample(x, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y[i] - expect[i]) < 1e-12);
  }
}

TEST_CASE("featurize keeps constant axes") {
  GestureCapture c;
  for (int i = 0; i < 20; ++i) c.frames.push_back(ImuFrame{0.02 * i, {1.0, -2.0, 9.8}, 1.0});
  const auto f = featurize(c, FilterSpec{});
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(std::abs(f[i] - 1.0) < 1e-9);
    CHECK(std::abs(f[10 + i] + 2.0) < 1e-9);
    CHECK(std::abs(f[20 + i] - 9.8) < 1e-9);
  }
}

TEST_CASE("featurize composes filtfilt and resample") {
  SynthParams p;
  p.seed = 17;
  const auto stream = synth_gesture(Label::O, p);
  const auto capture = gate_capture(stream, 0.5);
  const auto f = featurize(capture, FilterSpec{});
  REQUIRE(f.values.size() == 30);
  CHECK(f.finite());
  for (std::size_t axis = 0; axis < 3; ++axis) {
    std::vector<double> x;
    for (const auto& fr : capture.frames) x.push_back(fr.accel[axis]);
    const auto expect = oracle::resample(oracle::filtfilt(oracle::butter2(0.2), x, 6), 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(f[axis * 10 + i] - expect[i]) < 1e-9);
  }
}

TEST_CASE("featurize stays finite on random finite input") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int trial = 0; trial < 100; ++trial) {
    GestureCapture c;
    const std::size_t n = 7 + gen() % 100;
    for (std::size_t i = 0; i < n; ++i) c.frames.push_back(ImuFrame{0.02 * static_cast<double>(i), {u(gen), u(gen), u(gen)}, 1.0});
    CHECK(featurize(c, FilterSpec{}).finite());
  }
}

TEST_CASE("validate_stream") {
  auto s = flex_stream({0, 1, 1});
  CHECK_NOTHROW(validate_stream(s));
  s[2].t = s[1].t;
  CHECK(code_of([&] { validate_stream(s); }) == ErrorCode::kInvalidArgument);
  s = flex_stream({0, 1.5});
  CHECK(code_of([&] { validate_stream(s); }) == ErrorCode::kInvalidArgument);
  s = flex_stream({0, 1});
  s[0].accel[1] = std::nan("");
  CHECK(code_of([&] { validate_stream(s); }) == ErrorCode::kInvalidArgument);
}

}
