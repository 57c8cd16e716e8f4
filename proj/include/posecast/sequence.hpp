#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "posecast/errors.hpp"
#include "posecast/layout.hpp"

namespace posecast {

// A recorded motion clip: [frames][persons][joints][xyz] millimeter
// coordinates plus optional per-frame per-person detection scores in [0,1].
// Immutable after construction by convention; all transforms return copies.
struct MotionSequence {
  std::string name;
  double fps = 0.0;
  int frames = 0;
  int persons = 0;
  JointLayout layout;
  std::vector<double> data;      // frames * persons * joints * 3
  std::vector<double> validity;  // empty, or frames * persons

  int joints() const { return layout.size(); }
  bool has_validity() const { return !validity.empty(); }

  std::size_t coord_count() const {
    return static_cast<std::size_t>(frames) * persons * joints() * 3;
  }

  double& at(int f, int p, int j, int k) {
    return data[((static_cast<std::size_t>(f) * persons + p) * joints() + j) * 3 + k];
  }
  double at(int f, int p, int j, int k) const {
    return data[((static_cast<std::size_t>(f) * persons + p) * joints() + j) * 3 + k];
  }

  double& score_at(int f, int p) {
    return validity[static_cast<std::size_t>(f) * persons + p];
  }
  double score_at(int f, int p) const {
    return validity[static_cast<std::size_t>(f) * persons + p];
  }

  void validate() const {
    layout.validate();
    if (frames < 1) throw DataError("MotionSequence '" + name + "': frames < 1");
    if (persons < 1) throw DataError("MotionSequence '" + name + "': persons < 1");
    if (!(fps > 0.0)) throw DataError("MotionSequence '" + name + "': fps must be > 0");
    if (data.size() != coord_count())
      throw DataError("MotionSequence '" + name + "': data size does not match shape");
    for (double x : data)
      if (!std::isfinite(x))
        throw DataError("MotionSequence '" + name + "': non-finite coordinate");
    if (has_validity()) {
      if (validity.size() != static_cast<std::size_t>(frames) * persons)
        throw DataError("MotionSequence '" + name + "': validity size mismatch");
      for (double s : validity)
        if (!std::isfinite(s))
          throw DataError("MotionSequence '" + name + "': non-finite validity score");
    }
  }
};

}  // namespace posecast
