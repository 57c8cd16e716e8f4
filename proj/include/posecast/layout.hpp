#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "posecast/errors.hpp"

namespace posecast {

// Skeleton description: joint names, the two hip indices used for centering,
// and index pairs for rendering bones.
struct JointLayout {
  std::vector<std::string> names;
  int left_hip = -1;
  int right_hip = -1;
  std::vector<std::array<int, 2>> edges;

  int size() const { return static_cast<int>(names.size()); }

  void validate() const {
    const int n = size();
    if (n < 1) throw ConfigError("JointLayout: empty joint list");
    std::set<std::string> uniq(names.begin(), names.end());
    if (static_cast<int>(uniq.size()) != n)
      throw ConfigError("JointLayout: joint names must be unique");
    if (left_hip < 0 || left_hip >= n || right_hip < 0 || right_hip >= n)
      throw ConfigError("JointLayout: hip index out of range");
    if (left_hip == right_hip)
      throw ConfigError("JointLayout: hip indices must be distinct");
    for (const auto& e : edges)
      if (e[0] < 0 || e[0] >= n || e[1] < 0 || e[1] >= n)
        throw ConfigError("JointLayout: edge references invalid joint index");
  }
};

// The default 13-joint skeleton: 2 hips, 2 shoulders, 1 nose, 2 knees,
// 2 ankles, 2 elbows, 2 wrists.
inline JointLayout default_layout_13() {
  JointLayout l;
  l.names = {"nose",       "left_shoulder", "right_shoulder", "left_elbow",
             "right_elbow", "left_wrist",    "right_wrist",    "left_hip",
             "right_hip",   "left_knee",     "right_knee",     "left_ankle",
             "right_ankle"};
  l.left_hip = 7;
  l.right_hip = 8;
  l.edges = {{0, 1},  {0, 2},  {1, 2},  {1, 3},  {3, 5},  {2, 4}, {4, 6},
             {1, 7},  {2, 8},  {7, 8},  {7, 9},  {9, 11}, {8, 10}, {10, 12}};
  return l;
}

// Concatenation of N copies of a base layout, used for merged multi-person
// windows (e.g. 13+13 = 26 joints for two persons).
inline JointLayout merged_layout(const JointLayout& base, int persons) {
  JointLayout out;
  const int n = base.size();
  for (int p = 0; p < persons; ++p) {
    for (const auto& name : base.names)
      out.names.push_back("p" + std::to_string(p) + "_" + name);
    for (const auto& e : base.edges)
      out.edges.push_back({e[0] + p * n, e[1] + p * n});
  }
  out.left_hip = base.left_hip;
  out.right_hip = base.right_hip;
  out.validate();
  return out;
}

}  // namespace posecast
