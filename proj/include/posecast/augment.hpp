#pragma once

#include <cmath>
#include <vector>

#include "posecast/errors.hpp"
#include "posecast/nn/core.hpp"
#include "posecast/rng.hpp"
#include "posecast/window.hpp"

namespace posecast {

// Geometric augmentation settings: one yaw rotation about the vertical (y)
// axis and one uniform scale per window, both applied to input and target.
struct GeoAugSpec {
  bool enabled = true;
  double yaw_range = 3.14159265358979323846;  // radians, +/-
  double scale_min = 0.9;
  double scale_max = 1.1;
};

inline ForecastWindow geometric_augment(const ForecastWindow& w, double yaw_range,
                                        double scale_min, double scale_max,
                                        SeededRng& rng) {
  if (!w.centered)
    throw ConfigError("geometric_augment: window must be centered");
  const double yaw = rng.uniform(-yaw_range, yaw_range);
  const double scale = rng.uniform(scale_min, scale_max);
  const double c = std::cos(yaw), s = std::sin(yaw);
  ForecastWindow out = w;
  auto apply = [&](PoseSeq& seq) {
    for (int t = 0; t < seq.frames; ++t)
      for (int j = 0; j < seq.joints; ++j) {
        const double x = seq.at(t, j, 0), y = seq.at(t, j, 1), z = seq.at(t, j, 2);
        seq.at(t, j, 0) = scale * (c * x + s * z);
        seq.at(t, j, 1) = scale * y;
        seq.at(t, j, 2) = scale * (-s * x + c * z);
      }
  };
  apply(out.input);
  apply(out.target);
  return out;
}

// Masking augmentation over the model input: contiguous spans zeroed along
// the time or channel axis. Never applied to targets.
struct SpecAugSpec {
  bool enabled = true;
  int time_masks = 2;
  int time_mask_max = 10;   // frames
  int channel_masks = 2;
  int channel_mask_max = 6; // channels

  void validate(int t_in, int channels) const {
    if (time_masks < 0 || channel_masks < 0)
      throw ConfigError("SpecAugSpec: mask counts must be nonnegative");
    if (time_mask_max < 0 || time_mask_max > t_in)
      throw ConfigError("SpecAugSpec: time_mask_max exceeds input length");
    if (channel_mask_max < 0 || channel_mask_max > channels)
      throw ConfigError("SpecAugSpec: channel_mask_max exceeds channel count");
  }
};

struct MaskSpan {
  bool time_axis = true;
  int start = 0;
  int width = 0;
};

template <typename S>
inline void apply_time_mask(nn::Mat<S>& x, int start, int width) {
  x.middleRows(start, width).setZero();
}

template <typename S>
inline void apply_channel_mask(nn::Mat<S>& x, int start, int width) {
  x.middleCols(start, width).setZero();
}

// In-place masking of one input window x (t_in rows, J*3 columns). Mask
// widths are drawn uniformly in [0, max]; returns the realized spans.
template <typename S>
inline std::vector<MaskSpan> spec_augment_inplace(nn::Mat<S>& x,
                                                  const SpecAugSpec& spec,
                                                  SeededRng& rng) {
  std::vector<MaskSpan> spans;
  if (!spec.enabled) return spans;
  const int t = static_cast<int>(x.rows());
  const int c = static_cast<int>(x.cols());
  for (int i = 0; i < spec.time_masks; ++i) {
    const int w = static_cast<int>(rng.uniform_int(0, std::min(spec.time_mask_max, t)));
    const int start = static_cast<int>(rng.uniform_int(0, t - w));
    if (w > 0) apply_time_mask(x, start, w);
    spans.push_back({true, start, w});
  }
  for (int i = 0; i < spec.channel_masks; ++i) {
    const int w =
        static_cast<int>(rng.uniform_int(0, std::min(spec.channel_mask_max, c)));
    const int start = static_cast<int>(rng.uniform_int(0, c - w));
    if (w > 0) apply_channel_mask(x, start, w);
    spans.push_back({false, start, w});
  }
  return spans;
}

template <typename S>
inline nn::Mat<S> spec_augment(const nn::Mat<S>& x, const SpecAugSpec& spec,
                               SeededRng& rng,
                               std::vector<MaskSpan>* spans_out = nullptr) {
  nn::Mat<S> y = x;
  auto spans = spec_augment_inplace(y, spec, rng);
  if (spans_out) *spans_out = std::move(spans);
  return y;
}

}  // namespace posecast
