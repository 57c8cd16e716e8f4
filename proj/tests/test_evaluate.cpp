#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <memory>
#include <thread>

#include "posecast/evaluate.hpp"
#include "posecast/forecaster.hpp"
#include "posecast/synth.hpp"
#include "posecast/window.hpp"

using namespace posecast;

namespace {

std::vector<ForecastWindow> corpus_windows(const MotionParams& params, int seqs,
                                           int frames, std::uint64_t seed,
                                           int stride = 5) {
  auto corpus = synth_corpus(seed, seqs, 25.0, frames, 1, params);
  std::vector<ForecastWindow> out;
  for (const auto& s : corpus) {
    auto w = make_windows(s, WindowSpec{50, 25, stride});
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

}  // namespace

TEST_CASE("a perfect oracle scores zero MPJPE and VIM at all horizons") {
  auto windows = corpus_windows(MotionParams{}, 2, 90, 3);
  auto index = std::make_shared<std::size_t>(0);
  CallbackForecaster oracle("oracle", 25, [&windows, index](const PoseSeq&) {
    // The protocol centers each window before predicting; replay the
    // centered target so the uncentered comparison is exact.
    const auto c = center_window(windows[(*index)++ % windows.size()]);
    return c.target;
  });
  HorizonSet horizons{{400.0, 1000.0}, 25.0};
  EvalOptions opts;
  opts.measure_throughput = false;
  const auto report = evaluate(oracle, windows, horizons, opts);
  REQUIRE(report.mpjpe_mm[0] < 1e-9);
  REQUIRE(report.mpjpe_mm[1] < 1e-9);
  REQUIRE(report.vim_mm[0] < 1e-9);
  REQUIRE(report.sample_count == static_cast<std::int64_t>(windows.size()));
}

TEST_CASE("repeat_last on a static corpus scores zero") {
  auto windows = corpus_windows(MotionParams::statics(), 2, 90, 5);
  RepeatLastFrame model(25);
  HorizonSet horizons{{400.0, 1000.0}, 25.0};
  EvalOptions opts;
  opts.measure_throughput = false;
  const auto report = evaluate(model, windows, horizons, opts);
  REQUIRE(report.mpjpe_mm[0] == 0.0);
  REQUIRE(report.mpjpe_mm[1] == 0.0);
}

TEST_CASE("single-window evaluation equals a direct metric call") {
  auto windows = corpus_windows(MotionParams{}, 1, 80, 7);
  windows.resize(1);
  LastDeltaAverage model(25);
  HorizonSet horizons{{1000.0}, 25.0};
  EvalOptions opts;
  opts.measure_throughput = false;
  const auto report = evaluate(model, windows, horizons, opts);
  const double direct = mpjpe(windows[0].target, last_delta_average(windows[0]), 24);
  REQUIRE(report.mpjpe_mm[0] == Catch::Approx(direct).epsilon(1e-12));
}

TEST_CASE("evaluation accepts pre-centered windows and matches the uncentered path") {
  auto windows = corpus_windows(MotionParams{}, 1, 90, 9);
  std::vector<ForecastWindow> centered;
  for (const auto& w : windows) centered.push_back(center_window(w));
  LastDeltaAverage model(25);
  HorizonSet horizons{{1000.0}, 25.0};
  EvalOptions opts;
  opts.measure_throughput = false;
  const auto a = evaluate(model, windows, horizons, opts);
  const auto b = evaluate(model, centered, horizons, opts);
  REQUIRE(a.mpjpe_mm[0] == Catch::Approx(b.mpjpe_mm[0]).epsilon(1e-9));
}

TEST_CASE("fade dominates mpjpe whenever throughput is measured") {
  auto windows = corpus_windows(MotionParams{}, 1, 80, 11);
  RepeatLastFrame model(25);
  HorizonSet horizons{{400.0, 1000.0}, 25.0};
  EvalOptions opts;
  opts.fps.iters = 10;
  const auto report = evaluate(model, windows, horizons, opts);
  REQUIRE(report.fps.has_value());
  REQUIRE(report.fce_mm.has_value());
  for (std::size_t h = 0; h < report.fade_mm.size(); ++h)
    REQUIRE(report.fade_mm[h] >= report.mpjpe_mm[h]);
  REQUIRE_NOTHROW(report.validate());
}

TEST_CASE("evaluate validates shapes, horizons and fps consistency") {
  auto windows = corpus_windows(MotionParams{}, 1, 80, 13);
  RepeatLastFrame model(25);
  SECTION("horizon fps mismatch") {
    HorizonSet horizons{{1000.0}, 30.0};
    REQUIRE_THROWS_AS(evaluate(model, windows, horizons), ConfigError);
  }
  SECTION("horizon outside output range") {
    HorizonSet horizons{{1040.0}, 25.0};
    REQUIRE_THROWS_AS(evaluate(model, windows, horizons), ConfigError);
  }
  SECTION("model output length mismatch") {
    RepeatLastFrame short_model(20);
    HorizonSet horizons{{400.0}, 25.0};
    REQUIRE_THROWS_AS(evaluate(short_model, windows, horizons), ConfigError);
  }
  SECTION("no windows") {
    HorizonSet horizons{{400.0}, 25.0};
    REQUIRE_THROWS_AS(evaluate(model, {}, horizons), ConfigError);
  }
}

TEST_CASE("measure_fps matches a stub with a known delay") {
  ForecastWindow sample = corpus_windows(MotionParams{}, 1, 80, 17)[0];
  CallbackForecaster stub("sleepy", 25, [](const PoseSeq& in) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    PoseSeq out(25, in.joints);
    return out;
  });
  const double fps = measure_fps(stub, sample, 1, 12);
  REQUIRE(fps == Catch::Approx(100.0).margin(20.0));
  SECTION("warmup does not change a stateless stub's expectation") {
    const double fps2 = measure_fps(stub, sample, 0, 12);
    REQUIRE(fps2 == Catch::Approx(fps).margin(0.4 * fps));
  }
}

TEST_CASE("measure_fps requires at least 10 iterations") {
  ForecastWindow sample = corpus_windows(MotionParams{}, 1, 80, 19)[0];
  RepeatLastFrame model(25);
  REQUIRE_THROWS_AS(measure_fps(model, sample, 0, 9), ConfigError);
  REQUIRE_THROWS_AS(measure_fps(model, sample, -1, 10), ConfigError);
}

TEST_CASE("repeated throughput measurements are stable on a delay stub") {
  ForecastWindow sample = corpus_windows(MotionParams{}, 1, 80, 23)[0];
  CallbackForecaster stub("sleepy", 25, [](const PoseSeq& in) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    return PoseSeq(25, in.joints);
  });
  std::vector<double> runs;
  for (int i = 0; i < 5; ++i) runs.push_back(measure_fps(stub, sample, 0, 10));
  double mean = 0.0;
  for (double r : runs) mean += r / runs.size();
  double var = 0.0;
  for (double r : runs) var += (r - mean) * (r - mean) / runs.size();
  REQUIRE(std::sqrt(var) / mean < 0.2);
}
