#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "posecast/errors.hpp"
#include "posecast/layout.hpp"
#include "posecast/rng.hpp"
#include "posecast/sequence.hpp"

namespace posecast {

// Parameters of the synthetic walker corpus. Motions combine a linear pelvis
// trajectory with pendulum-style limb swings, so constant-velocity and
// periodic structure both exist and all limb segment lengths stay constant
// within a sequence.
struct MotionParams {
  double speed_min_mmps = 600.0;
  double speed_max_mmps = 1600.0;
  double swing_min_rad = 0.25;
  double swing_max_rad = 0.65;
  double swing_freq_min_hz = 0.7;
  double swing_freq_max_hz = 1.3;
  double body_scale_min = 0.9;
  double body_scale_max = 1.1;
  double start_box_mm = 2000.0;

  static MotionParams statics() {
    MotionParams p;
    p.speed_min_mmps = p.speed_max_mmps = 0.0;
    p.swing_min_rad = p.swing_max_rad = 0.0;
    return p;
  }

  static MotionParams constant_velocity(double speed_mmps) {
    MotionParams p;
    p.speed_min_mmps = p.speed_max_mmps = speed_mmps;
    p.swing_min_rad = p.swing_max_rad = 0.0;
    return p;
  }
};

namespace synth_detail {

// Joint offsets relative to the pelvis, body frame: +x left, +y up, +z forward.
// Order matches default_layout_13().
inline const std::array<std::array<double, 3>, 13>& body_template() {
  static const std::array<std::array<double, 3>, 13> t = {{
      {0.0, 680.0, 80.0},     // nose
      {175.0, 560.0, 0.0},    // left_shoulder
      {-175.0, 560.0, 0.0},   // right_shoulder
      {195.0, 270.0, 20.0},   // left_elbow
      {-195.0, 270.0, 20.0},  // right_elbow
      {210.0, 10.0, 40.0},    // left_wrist
      {-210.0, 10.0, 40.0},   // right_wrist
      {95.0, 0.0, 0.0},       // left_hip
      {-95.0, 0.0, 0.0},      // right_hip
      {100.0, -430.0, 0.0},   // left_knee
      {-100.0, -430.0, 0.0},  // right_knee
      {105.0, -860.0, 0.0},   // left_ankle
      {-105.0, -860.0, 0.0},  // right_ankle
  }};
  return t;
}

inline std::array<double, 3> rot_x(const std::array<double, 3>& p, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {p[0], c * p[1] - s * p[2], s * p[1] + c * p[2]};
}

inline std::array<double, 3> rot_y(const std::array<double, 3>& p, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {c * p[0] + s * p[2], p[1], -s * p[0] + c * p[2]};
}

// Rotates the chain point about a fixed pivot in the sagittal plane.
inline std::array<double, 3> swing_about(const std::array<double, 3>& p,
                                         const std::array<double, 3>& pivot,
                                         double angle) {
  std::array<double, 3> d = {p[0] - pivot[0], p[1] - pivot[1], p[2] - pivot[2]};
  d = rot_x(d, angle);
  return {pivot[0] + d[0], pivot[1] + d[1], pivot[2] + d[2]};
}

}  // namespace synth_detail

// Deterministic synthetic corpus: `count` sequences of `frames` frames at
// `fps`, each with `persons` independent walkers.
inline std::vector<MotionSequence> synth_corpus(std::uint64_t seed, int count,
                                                double fps, int frames,
                                                int persons,
                                                const MotionParams& params = {}) {
  if (count < 1) throw ConfigError("synth_corpus: count must be >= 1");
  if (frames < 1) throw ConfigError("synth_corpus: frames must be >= 1");
  if (persons < 1) throw ConfigError("synth_corpus: persons must be >= 1");
  if (!(fps > 0.0)) throw ConfigError("synth_corpus: fps must be > 0");

  using namespace synth_detail;
  const JointLayout layout = default_layout_13();
  SeededRng root(seed);
  std::vector<MotionSequence> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    SeededRng rng = root.fork(static_cast<std::uint64_t>(i));
    MotionSequence seq;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "synth_%04d", i);
    seq.name = buf;
    seq.fps = fps;
    seq.frames = frames;
    seq.persons = persons;
    seq.layout = layout;
    seq.data.resize(seq.coord_count());

    for (int p = 0; p < persons; ++p) {
      const double heading = rng.uniform(0.0, 2.0 * M_PI);
      const double speed = rng.uniform(params.speed_min_mmps, params.speed_max_mmps);
      const double amp = rng.uniform(params.swing_min_rad, params.swing_max_rad);
      const double freq = rng.uniform(params.swing_freq_min_hz, params.swing_freq_max_hz);
      const double phase = rng.uniform(0.0, 2.0 * M_PI);
      const double scale = rng.uniform(params.body_scale_min, params.body_scale_max);
      const double x0 = rng.uniform(-params.start_box_mm, params.start_box_mm);
      const double z0 = rng.uniform(-params.start_box_mm, params.start_box_mm);
      const double dirx = std::sin(heading), dirz = std::cos(heading);

      std::array<std::array<double, 3>, 13> base = body_template();
      for (auto& j : base)
        for (double& c : j) c *= scale;

      for (int f = 0; f < frames; ++f) {
        const double t = f / fps;
        const double th = amp * std::sin(2.0 * M_PI * freq * t + phase);
        std::array<std::array<double, 3>, 13> local = base;
        // Legs: left swings by th, right antiphase; knee+ankle follow rigidly.
        local[9] = swing_about(base[9], base[7], th);
        local[11] = swing_about(base[11], base[7], th);
        local[10] = swing_about(base[10], base[8], -th);
        local[12] = swing_about(base[12], base[8], -th);
        // Arms: antiphase to the same-side leg.
        local[3] = swing_about(base[3], base[1], -th);
        local[5] = swing_about(base[5], base[1], -th);
        local[4] = swing_about(base[4], base[2], th);
        local[6] = swing_about(base[6], base[2], th);

        const double px = x0 + speed * t * dirx;
        const double pz = z0 + speed * t * dirz;
        for (int j = 0; j < 13; ++j) {
          const auto w = rot_y(local[j], heading);
          seq.at(f, p, j, 0) = px + w[0];
          seq.at(f, p, j, 1) = 900.0 * scale + w[1];
          seq.at(f, p, j, 2) = pz + w[2];
        }
      }
    }
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace posecast
