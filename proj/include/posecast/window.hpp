#pragma once

#include <array>
#include <vector>

#include "posecast/errors.hpp"
#include "posecast/pose.hpp"
#include "posecast/sequence.hpp"

namespace posecast {

struct WindowSpec {
  int t_in = 50;
  int t_out = 25;
  int stride = 1;

  void validate() const {
    if (t_in < 2) throw ConfigError("WindowSpec: t_in must be >= 2");
    if (t_out < 1) throw ConfigError("WindowSpec: t_out must be >= 1");
    if (stride < 1) throw ConfigError("WindowSpec: stride must be >= 1");
  }
};

// Default pairing: the model observes twice as many frames as it predicts.
inline WindowSpec default_window_spec(int t_out) { return WindowSpec{2 * t_out, t_out, 1}; }

// One (input, target) training/evaluation sample for a single person (or a
// merged multi-person skeleton). When `centered`, the mid-hip of the last
// input frame has been moved to the origin and `offset` holds the shift.
struct ForecastWindow {
  PoseSeq input;   // [t_in][J][3]
  PoseSeq target;  // [t_out][J][3]
  double fps = 0.0;
  bool centered = false;
  std::array<double, 3> offset{0.0, 0.0, 0.0};
  int left_hip = -1;
  int right_hip = -1;

  int t_in() const { return input.frames; }
  int t_out() const { return target.frames; }
  int joints() const { return input.joints; }
};

// Number of valid window starts: floor((frames - t_in - t_out)/stride) + 1,
// or 0 when the sequence is too short.
inline int window_count(int frames, const WindowSpec& spec) {
  const int span = spec.t_in + spec.t_out;
  if (frames < span) return 0;
  return (frames - span) / spec.stride + 1;
}

// Slices a sequence into per-person windows at starts 0, stride, 2*stride, ...
// Persons are emitted independently (person-major, then start order is
// start-major: all persons of start 0, then start `stride`, ...).
inline std::vector<ForecastWindow> make_windows(const MotionSequence& seq,
                                                const WindowSpec& spec) {
  spec.validate();
  std::vector<ForecastWindow> out;
  const int n = window_count(seq.frames, spec);
  const int J = seq.joints();
  out.reserve(static_cast<std::size_t>(n) * seq.persons);
  for (int w = 0; w < n; ++w) {
    const int start = w * spec.stride;
    for (int p = 0; p < seq.persons; ++p) {
      ForecastWindow fw;
      fw.input = PoseSeq(spec.t_in, J);
      fw.target = PoseSeq(spec.t_out, J);
      fw.fps = seq.fps;
      fw.left_hip = seq.layout.left_hip;
      fw.right_hip = seq.layout.right_hip;
      for (int t = 0; t < spec.t_in; ++t)
        for (int j = 0; j < J; ++j)
          for (int k = 0; k < 3; ++k)
            fw.input.at(t, j, k) = seq.at(start + t, p, j, k);
      for (int t = 0; t < spec.t_out; ++t)
        for (int j = 0; j < J; ++j)
          for (int k = 0; k < 3; ++k)
            fw.target.at(t, j, k) = seq.at(start + spec.t_in + t, p, j, k);
      out.push_back(std::move(fw));
    }
  }
  return out;
}

inline std::array<double, 3> mid_hip(const PoseSeq& s, int frame, int left_hip,
                                     int right_hip) {
  std::array<double, 3> m;
  for (int k = 0; k < 3; ++k)
    m[k] = 0.5 * (s.at(frame, left_hip, k) + s.at(frame, right_hip, k));
  return m;
}

inline void shift_inplace(PoseSeq& s, const std::array<double, 3>& d) {
  for (int t = 0; t < s.frames; ++t)
    for (int j = 0; j < s.joints; ++j)
      for (int k = 0; k < 3; ++k)
        s.at(t, j, k) += d[k];
}

// Subtracts the mid-hip of the last input frame from every coordinate.
inline ForecastWindow center_window(const ForecastWindow& w) {
  if (w.centered) throw ConfigError("center_window: window is already centered");
  if (w.left_hip < 0 || w.right_hip < 0 || w.left_hip >= w.joints() ||
      w.right_hip >= w.joints())
    throw ConfigError("center_window: window has no valid hip indices");
  ForecastWindow out = w;
  const auto m = mid_hip(w.input, w.t_in() - 1, w.left_hip, w.right_hip);
  shift_inplace(out.input, {-m[0], -m[1], -m[2]});
  shift_inplace(out.target, {-m[0], -m[1], -m[2]});
  out.offset = m;
  out.centered = true;
  return out;
}

// Adds the stored offset back and clears the centering state.
inline ForecastWindow uncenter_window(const ForecastWindow& w) {
  if (!w.centered) throw ConfigError("uncenter_window: window is not centered");
  ForecastWindow out = w;
  shift_inplace(out.input, w.offset);
  shift_inplace(out.target, w.offset);
  out.offset = {0.0, 0.0, 0.0};
  out.centered = false;
  return out;
}

inline ForecastWindow translate_window(const ForecastWindow& w,
                                       const std::array<double, 3>& d) {
  ForecastWindow out = w;
  shift_inplace(out.input, d);
  shift_inplace(out.target, d);
  return out;
}

enum class MergeCentering { kNone, kSharedMidHip };

// Concatenates per-person windows along the joint axis in person-index order.
// With kSharedMidHip a single offset (mean of all persons' mid-hips at the
// last input frame) is subtracted so inter-person geometry is preserved.
inline ForecastWindow merge_persons(const std::vector<ForecastWindow>& windows,
                                    MergeCentering centering = MergeCentering::kNone) {
  if (windows.empty()) throw ConfigError("merge_persons: no windows given");
  const ForecastWindow& first = windows.front();
  for (const auto& w : windows) {
    if (w.t_in() != first.t_in() || w.t_out() != first.t_out() ||
        w.joints() != first.joints() || w.fps != first.fps)
      throw ConfigError("merge_persons: windows have mismatched shapes");
    if (w.centered)
      throw ConfigError("merge_persons: expects uncentered windows");
  }
  const int P = static_cast<int>(windows.size());
  const int J = first.joints();
  ForecastWindow out;
  out.fps = first.fps;
  out.left_hip = first.left_hip;
  out.right_hip = first.right_hip;
  out.input = PoseSeq(first.t_in(), P * J);
  out.target = PoseSeq(first.t_out(), P * J);
  for (int p = 0; p < P; ++p) {
    for (int t = 0; t < first.t_in(); ++t)
      for (int j = 0; j < J; ++j)
        for (int k = 0; k < 3; ++k)
          out.input.at(t, p * J + j, k) = windows[p].input.at(t, j, k);
    for (int t = 0; t < first.t_out(); ++t)
      for (int j = 0; j < J; ++j)
        for (int k = 0; k < 3; ++k)
          out.target.at(t, p * J + j, k) = windows[p].target.at(t, j, k);
  }
  if (centering == MergeCentering::kSharedMidHip) {
    std::array<double, 3> m{0.0, 0.0, 0.0};
    for (const auto& w : windows) {
      const auto h = mid_hip(w.input, w.t_in() - 1, w.left_hip, w.right_hip);
      for (int k = 0; k < 3; ++k) m[k] += h[k];
    }
    for (int k = 0; k < 3; ++k) m[k] /= P;
    shift_inplace(out.input, {-m[0], -m[1], -m[2]});
    shift_inplace(out.target, {-m[0], -m[1], -m[2]});
    out.offset = m;
    out.centered = true;
  }
  return out;
}

// Windows a multi-person sequence into merged samples: per start, the
// per-person windows are concatenated along the joint axis.
inline std::vector<ForecastWindow> make_merged_windows(
    const MotionSequence& seq, const WindowSpec& spec,
    MergeCentering centering = MergeCentering::kNone) {
  auto per_person = make_windows(seq, spec);
  std::vector<ForecastWindow> out;
  const int P = seq.persons;
  out.reserve(per_person.size() / P);
  for (std::size_t w = 0; w + P <= per_person.size(); w += P) {
    std::vector<ForecastWindow> group(per_person.begin() + w,
                                      per_person.begin() + w + P);
    out.push_back(merge_persons(group, centering));
  }
  return out;
}

// Inverse of merge_persons for an uncentered merged window.
inline std::vector<ForecastWindow> split_persons(const ForecastWindow& merged,
                                                 int persons) {
  if (persons < 1 || merged.joints() % persons != 0)
    throw ConfigError("split_persons: joint count not divisible by person count");
  if (merged.centered)
    throw ConfigError("split_persons: expects an uncentered window");
  const int J = merged.joints() / persons;
  std::vector<ForecastWindow> out(persons);
  for (int p = 0; p < persons; ++p) {
    ForecastWindow w;
    w.fps = merged.fps;
    w.left_hip = merged.left_hip;
    w.right_hip = merged.right_hip;
    w.input = PoseSeq(merged.t_in(), J);
    w.target = PoseSeq(merged.t_out(), J);
    for (int t = 0; t < merged.t_in(); ++t)
      for (int j = 0; j < J; ++j)
        for (int k = 0; k < 3; ++k)
          w.input.at(t, j, k) = merged.input.at(t, p * J + j, k);
    for (int t = 0; t < merged.t_out(); ++t)
      for (int j = 0; j < J; ++j)
        for (int k = 0; k < 3; ++k)
          w.target.at(t, j, k) = merged.target.at(t, p * J + j, k);
    out[p] = std::move(w);
  }
  return out;
}

}  // namespace posecast
