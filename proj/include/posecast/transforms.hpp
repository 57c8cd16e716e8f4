#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posecast/errors.hpp"
#include "posecast/rng.hpp"
#include "posecast/sequence.hpp"

namespace posecast {

// Keeps frames 0, factor, 2*factor, ... and divides the frame rate.
inline MotionSequence downsample(const MotionSequence& seq, int factor) {
  if (factor < 1) throw ConfigError("downsample: factor must be >= 1");
  if (factor == 1) return seq;
  MotionSequence out;
  out.name = seq.name;
  out.fps = seq.fps / factor;
  out.persons = seq.persons;
  out.layout = seq.layout;
  out.frames = (seq.frames - 1) / factor + 1;
  const int J = seq.joints();
  out.data.resize(out.coord_count());
  if (seq.has_validity())
    out.validity.resize(static_cast<std::size_t>(out.frames) * out.persons);
  for (int f = 0; f < out.frames; ++f) {
    const int src = f * factor;
    for (int p = 0; p < seq.persons; ++p) {
      for (int j = 0; j < J; ++j)
        for (int k = 0; k < 3; ++k)
          out.at(f, p, j, k) = seq.at(src, p, j, k);
      if (seq.has_validity()) out.score_at(f, p) = seq.score_at(src, p);
    }
  }
  return out;
}

// Reorders or subsets joints: output joint i takes source joint mapping[i].
// Duplicate source indices are allowed and simply duplicate columns.
inline MotionSequence select_joints(const MotionSequence& seq,
                                    const JointLayout& target_layout,
                                    const std::vector<int>& mapping) {
  target_layout.validate();
  if (static_cast<int>(mapping.size()) != target_layout.size())
    throw ConfigError("select_joints: mapping length must equal target layout size");
  for (int m : mapping)
    if (m < 0 || m >= seq.joints())
      throw ConfigError("select_joints: mapping index " + std::to_string(m) +
                        " out of range for " + std::to_string(seq.joints()) +
                        " source joints");
  MotionSequence out;
  out.name = seq.name;
  out.fps = seq.fps;
  out.frames = seq.frames;
  out.persons = seq.persons;
  out.layout = target_layout;
  out.validity = seq.validity;
  out.data.resize(out.coord_count());
  const int J = target_layout.size();
  for (int f = 0; f < seq.frames; ++f)
    for (int p = 0; p < seq.persons; ++p)
      for (int j = 0; j < J; ++j)
        for (int k = 0; k < 3; ++k)
          out.at(f, p, j, k) = seq.at(f, p, mapping[j], k);
  return out;
}

// Replaces every frame whose detection score falls below `threshold` with the
// nearest preceding valid frame; leading invalid frames copy the first valid
// frame. Scores of substituted frames take the donor frame's score, which
// makes the operation idempotent.
inline MotionSequence fill_invalid_frames(const MotionSequence& seq,
                                          double threshold) {
  if (!seq.has_validity())
    throw DataError("fill_invalid_frames: sequence '" + seq.name +
                    "' has no validity scores");
  MotionSequence out = seq;
  const int J = seq.joints();
  for (int p = 0; p < seq.persons; ++p) {
    int first_valid = -1;
    for (int f = 0; f < seq.frames; ++f) {
      if (seq.score_at(f, p) >= threshold) {
        first_valid = f;
        break;
      }
    }
    if (first_valid < 0)
      throw DataError("fill_invalid_frames: sequence '" + seq.name +
                      "' person " + std::to_string(p) + " has no valid frame");
    int donor = first_valid;
    for (int f = 0; f < seq.frames; ++f) {
      if (seq.score_at(f, p) >= threshold) {
        donor = f;
        continue;
      }
      for (int j = 0; j < J; ++j)
        for (int k = 0; k < 3; ++k)
          out.at(f, p, j, k) = seq.at(donor, p, j, k);
      out.score_at(f, p) = seq.score_at(donor, p);
    }
  }
  return out;
}

// Conversion factor from the legacy scaled-inch unit to meters:
// ((10*3/1.8*si2m)/1.8) with si2m = (1.0/0.45)*2.54/100, approx 0.5226.
inline double legacy_scale_factor() {
  const double si2m = (1.0 / 0.45) * 2.54 / 100.0;
  return (10.0 * 3.0 / 1.8 * si2m) / 1.8;
}

inline double scale_correct_legacy(double value_scaled_inches) {
  return value_scaled_inches * legacy_scale_factor();
}

struct CorpusSplit {
  std::vector<MotionSequence> train;
  std::vector<MotionSequence> val;
  std::vector<MotionSequence> test;
};

// Deterministic split by hash of (seed, sequence name). Ratios must sum to
// at most 1; the remainder after train/val goes to test.
inline CorpusSplit split_corpus(const std::vector<MotionSequence>& seqs,
                                std::uint64_t seed, double train_ratio = 0.8,
                                double val_ratio = 0.1) {
  if (train_ratio < 0.0 || val_ratio < 0.0 || train_ratio + val_ratio > 1.0)
    throw ConfigError("split_corpus: invalid ratios");
  CorpusSplit out;
  for (const auto& s : seqs) {
    std::uint64_t h = seed ^ 0xcbf29ce484222325ULL;
    for (char c : s.name) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    const double u = static_cast<double>(detail::splitmix64(h) >> 11) * 0x1.0p-53;
    if (u < train_ratio)
      out.train.push_back(s);
    else if (u < train_ratio + val_ratio)
      out.val.push_back(s);
    else
      out.test.push_back(s);
  }
  return out;
}

}  // namespace posecast
