#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "posecast/errors.hpp"
#include "posecast/pose.hpp"

namespace posecast {

// Mean per joint position error at one frame: mean over persons and joints of
// the Euclidean distance between prediction and ground truth, millimeters.
inline double mpjpe(const PoseTensor& gt, const PoseTensor& pred, int frame_index) {
  if (!gt.same_shape(pred)) throw ConfigError("mpjpe: shape mismatch");
  if (frame_index < 0 || frame_index >= gt.frames)
    throw ConfigError("mpjpe: frame index out of range");
  double sum = 0.0;
  for (int p = 0; p < gt.persons; ++p) {
    for (int j = 0; j < gt.joints; ++j) {
      double d2 = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double d = gt.at(frame_index, p, j, k) - pred.at(frame_index, p, j, k);
        d2 += d * d;
      }
      sum += std::sqrt(d2);
    }
  }
  return sum / (static_cast<double>(gt.persons) * gt.joints);
}

// Error norm in 3*J-dimensional joint space at one frame, computed per person
// and averaged over persons. Same units as the input coordinates.
inline double vim(const PoseTensor& gt, const PoseTensor& pred, int frame_index) {
  if (!gt.same_shape(pred)) throw ConfigError("vim: shape mismatch");
  if (frame_index < 0 || frame_index >= gt.frames)
    throw ConfigError("vim: frame index out of range");
  double sum = 0.0;
  for (int p = 0; p < gt.persons; ++p) {
    double d2 = 0.0;
    for (int j = 0; j < gt.joints; ++j)
      for (int k = 0; k < 3; ++k) {
        const double d = gt.at(frame_index, p, j, k) - pred.at(frame_index, p, j, k);
        d2 += d * d;
      }
    sum += std::sqrt(d2);
  }
  return sum / gt.persons;
}

inline double mpjpe(const PoseSeq& gt, const PoseSeq& pred, int frame_index) {
  return mpjpe(as_tensor(gt), as_tensor(pred), frame_index);
}

inline double vim(const PoseSeq& gt, const PoseSeq& pred, int frame_index) {
  return vim(as_tensor(gt), as_tensor(pred), frame_index);
}

// Forecast-after-delay error: the positional error inflated by the fraction
// of the horizon consumed by one forecast's latency.
//   fade = mpjpe_t + mpjpe_t * (1000 ms / t_ms) * (1 / fps)
inline double fade(double mpjpe_t, double t_ms, double fps) {
  if (!(t_ms > 0.0)) throw ConfigError("fade: horizon must be positive");
  if (!(fps > 0.0)) throw ConfigError("fade: fps must be positive");
  return mpjpe_t + mpjpe_t * (1000.0 / t_ms) * (1.0 / fps);
}

// Fast-change error: limb displacement at 2000 mm/s accrued during one
// forecast interval.
inline double fce(double fps) {
  if (!(fps > 0.0)) throw ConfigError("fce: fps must be positive");
  return 2000.0 / fps;
}

// Evaluation horizons in milliseconds, tied to the output frame rate.
// A horizon h maps to frame index round(h*fps/1000) - 1.
struct HorizonSet {
  std::vector<double> horizons_ms;
  double fps = 0.0;

  int frame_index(double horizon_ms) const {
    return static_cast<int>(std::llround(horizon_ms * fps / 1000.0)) - 1;
  }

  void validate(int t_out) const {
    if (!(fps > 0.0)) throw ConfigError("HorizonSet: fps must be positive");
    if (horizons_ms.empty()) throw ConfigError("HorizonSet: no horizons");
    double prev = 0.0;
    for (double h : horizons_ms) {
      if (h <= prev) throw ConfigError("HorizonSet: horizons must be sorted ascending");
      const int idx = frame_index(h);
      if (idx < 0 || idx >= t_out)
        throw ConfigError("HorizonSet: horizon " + std::to_string(h) +
                          " ms maps outside the output range");
      prev = h;
    }
  }
};

// Display rounding used by the comparison tables: positional errors at or
// above 100 show as integers, below 100 with one decimal.
inline std::string display_metric(double value_mm) {
  char buf[64];
  if (value_mm >= 99.95)
    std::snprintf(buf, sizeof(buf), "%.0f", value_mm);
  else
    std::snprintf(buf, sizeof(buf), "%.1f", value_mm);
  return buf;
}

// FCE displays as a whole number of millimeters.
inline std::string display_fce(double value_mm) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.0f", value_mm);
  return buf;
}

}  // namespace posecast
