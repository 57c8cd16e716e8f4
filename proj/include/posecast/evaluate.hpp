#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "posecast/errors.hpp"
#include "posecast/forecaster.hpp"
#include "posecast/metrics.hpp"
#include "posecast/report.hpp"
#include "posecast/window.hpp"

namespace posecast {

// Wall-clock forecasts-per-second at batch size 1: `warmup` untimed passes,
// then `iters` timed passes on the same centered sample. Needs exclusive
// access to the model; not meaningful under concurrent load.
inline double measure_fps(const Forecaster& model, const ForecastWindow& sample,
                          int warmup, int iters) {
  if (iters < 10) throw ConfigError("measure_fps: iters must be >= 10");
  if (warmup < 0) throw ConfigError("measure_fps: warmup must be >= 0");
  const ForecastWindow centered = sample.centered ? sample : center_window(sample);
  for (int i = 0; i < warmup; ++i) (void)model.predict(centered.input);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) (void)model.predict(centered.input);
  const auto t1 = std::chrono::steady_clock::now();
  const double elapsed = std::chrono::duration<double>(t1 - t0).count();
  if (elapsed <= 0.0) return 1e12;  // below timer resolution
  return iters / elapsed;
}

struct FpsOptions {
  int warmup = 3;
  int iters = 30;
};

struct EvalOptions {
  // When false (deterministic runs), fps and the latency-derived fade/fce
  // columns are left absent.
  bool measure_throughput = true;
  FpsOptions fps;
};

// Evaluation protocol: every window is centered, the model predicts from the
// centered input, predictions are shifted back to global coordinates and
// compared against the uncentered targets. Per-horizon values are means over
// samples; fade/fce derive from one throughput measurement.
inline MetricReport evaluate(const Forecaster& model,
                             const std::vector<ForecastWindow>& windows,
                             const HorizonSet& horizons,
                             const EvalOptions& opts = {}) {
  if (windows.empty()) throw ConfigError("evaluate: no windows");
  const ForecastWindow& first = windows.front();
  for (const auto& w : windows)
    if (w.t_in() != first.t_in() || w.t_out() != first.t_out() ||
        w.joints() != first.joints() || w.fps != first.fps)
      throw ConfigError("evaluate: windows have mismatched shapes");
  if (horizons.fps != first.fps)
    throw ConfigError("evaluate: horizon fps does not match window fps");
  horizons.validate(first.t_out());
  if (model.t_out() != first.t_out())
    throw ConfigError("evaluate: model output length does not match windows");

  MetricReport report;
  report.model_name = model.name();
  report.param_count = model.param_count();
  report.horizons_ms = horizons.horizons_ms;
  const std::size_t nh = horizons.horizons_ms.size();
  report.mpjpe_mm.assign(nh, 0.0);
  report.vim_mm.assign(nh, 0.0);
  report.sample_count = static_cast<std::int64_t>(windows.size());

  for (const auto& w : windows) {
    // Windows that arrive centered (e.g. shared-anchor merged multi-person
    // samples) keep their own centering; everything else is mid-hip centered.
    const ForecastWindow uw = w.centered ? uncenter_window(w) : w;
    const ForecastWindow c = w.centered ? w : center_window(w);
    PoseSeq pred = model.predict(c.input);
    if (!pred.all_finite())
      throw NumericError("evaluate: model produced non-finite prediction");
    if (pred.frames != uw.t_out() || pred.joints != uw.joints())
      throw ConfigError("evaluate: prediction shape mismatch");
    for (int t = 0; t < pred.frames; ++t)
      for (int j = 0; j < pred.joints; ++j)
        for (int k = 0; k < 3; ++k) pred.at(t, j, k) += c.offset[k];
    for (std::size_t h = 0; h < nh; ++h) {
      const int idx = horizons.frame_index(horizons.horizons_ms[h]);
      report.mpjpe_mm[h] += mpjpe(uw.target, pred, idx);
      report.vim_mm[h] += vim(uw.target, pred, idx);
    }
  }
  for (std::size_t h = 0; h < nh; ++h) {
    report.mpjpe_mm[h] /= static_cast<double>(windows.size());
    report.vim_mm[h] /= static_cast<double>(windows.size());
  }

  if (opts.measure_throughput) {
    report.fps = measure_fps(model, first, opts.fps.warmup, opts.fps.iters);
    report.fce_mm = fce(*report.fps);
    report.fade_mm.resize(nh);
    for (std::size_t h = 0; h < nh; ++h)
      report.fade_mm[h] = fade(report.mpjpe_mm[h], horizons.horizons_ms[h], *report.fps);
  }
  report.validate();
  return report;
}

}  // namespace posecast
