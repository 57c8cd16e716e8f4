#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "posecast/errors.hpp"

namespace posecast {

// Dense [frames][joints][xyz] coordinate block, millimeters.
struct PoseSeq {
  int frames = 0;
  int joints = 0;
  std::vector<double> v;

  PoseSeq() = default;
  PoseSeq(int frames_, int joints_)
      : frames(frames_), joints(joints_),
        v(static_cast<std::size_t>(frames_) * joints_ * 3, 0.0) {}

  double& at(int t, int j, int k) {
    return v[(static_cast<std::size_t>(t) * joints + j) * 3 + k];
  }
  double at(int t, int j, int k) const {
    return v[(static_cast<std::size_t>(t) * joints + j) * 3 + k];
  }

  bool same_shape(const PoseSeq& o) const {
    return frames == o.frames && joints == o.joints;
  }

  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

// Dense [frames][persons][joints][xyz] block, millimeters.
struct PoseTensor {
  int frames = 0;
  int persons = 0;
  int joints = 0;
  std::vector<double> v;

  PoseTensor() = default;
  PoseTensor(int frames_, int persons_, int joints_)
      : frames(frames_), persons(persons_), joints(joints_),
        v(static_cast<std::size_t>(frames_) * persons_ * joints_ * 3, 0.0) {}

  double& at(int t, int p, int j, int k) {
    return v[((static_cast<std::size_t>(t) * persons + p) * joints + j) * 3 + k];
  }
  double at(int t, int p, int j, int k) const {
    return v[((static_cast<std::size_t>(t) * persons + p) * joints + j) * 3 + k];
  }

  bool same_shape(const PoseTensor& o) const {
    return frames == o.frames && persons == o.persons && joints == o.joints;
  }
};

// Single-person view helpers.
inline PoseTensor as_tensor(const PoseSeq& s) {
  PoseTensor t(s.frames, 1, s.joints);
  t.v = s.v;
  return t;
}

inline double joint_distance(const PoseSeq& a, const PoseSeq& b, int t, int j) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = a.at(t, j, k) - b.at(t, j, k);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace posecast
