#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "posekit/error.hpp"

namespace posekit {

/// Raw kinematic tree description. Joints are 1-based; parent[k-1] is the
/// parent of joint k and 0 denotes the virtual origin J_0.
struct SkeletonTopology {
  int num_joints = 0;
  std::vector<int> parent;
  std::vector<std::string> joint_names;
  std::vector<int> limb_joints;
};

struct SkeletonIssue {
  ErrorCode code;
  int joint = 0;
  std::string message;
};

/// Returns nothing when the topology is a valid tree rooted at J_0.
inline std::optional<SkeletonIssue> validate(const SkeletonTopology& topo) {
  const int k_count = topo.num_joints;
  if (k_count <= 0 || static_cast<int>(topo.parent.size()) != k_count) {
    return SkeletonIssue{ErrorCode::OrphanJoint, 0, "parent array length must equal num_joints > 0"};
  }
  if (!topo.joint_names.empty() && static_cast<int>(topo.joint_names.size()) != k_count) {
    return SkeletonIssue{ErrorCode::OrphanJoint, 0, "joint_names length must equal num_joints"};
  }
  for (int k = 1; k <= k_count; ++k) {
    const int p = topo.parent[k - 1];
    if (p < 0 || p > k_count) {
      return SkeletonIssue{ErrorCode::OrphanJoint, k,
                           "joint " + std::to_string(k) + " has out-of-range parent " + std::to_string(p)};
    }
  }
  for (int limb : topo.limb_joints) {
    if (limb < 1 || limb > k_count) {
      return SkeletonIssue{ErrorCode::OrphanJoint, limb, "limb joint index out of range"};
    }
  }
  // 0 = unvisited, 1 = on current walk, 2 = reaches the origin
  std::vector<int> state(k_count + 1, 0);
  state[0] = 2;
  for (int start = 1; start <= k_count; ++start) {
    std::vector<int> walk;
    int j = start;
    while (state[j] == 0) {
      state[j] = 1;
      walk.push_back(j);
      j = topo.parent[j - 1];
    }
    if (state[j] == 1) {
      return SkeletonIssue{ErrorCode::CycleDetected, j,
                           "joint " + std::to_string(j) + " lies on a parent cycle"};
    }
    for (int w : walk) state[w] = 2;
  }
  const auto roots = std::count(topo.parent.begin(), topo.parent.end(), 0);
  if (roots > 1) {
    return SkeletonIssue{ErrorCode::MultipleRoots, 0, std::to_string(roots) + " joints have parent 0"};
  }
  return std::nullopt;
}

struct PathStep {
  int bone = 0;  // 1..K
  int sign = 0;  // +1 ascending (toward the parent), -1 descending

  friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// Signed bone walk whose sum of sign * B_bone equals J_u - J_v. The walk
/// starts at v and ends at u.
struct TreePath {
  int u = 0;
  int v = 0;
  std::vector<PathStep> steps;
};

/// Validated, immutable tree with cached depth and a root-first joint order.
class Skeleton {
 public:
  explicit Skeleton(SkeletonTopology topo) : topo_(std::move(topo)) {
    if (auto issue = validate(topo_)) throw Error(issue->code, issue->message);
    const int k_count = topo_.num_joints;
    depth_.assign(k_count + 1, -1);
    depth_[0] = 0;
    for (int k = 1; k <= k_count; ++k) compute_depth(k);
    order_.resize(k_count);
    for (int k = 1; k <= k_count; ++k) order_[k - 1] = k;
    std::stable_sort(order_.begin(), order_.end(), [this](int a, int b) { return depth_[a] < depth_[b]; });
    for (int k = 1; k <= k_count; ++k) {
      if (topo_.parent[k - 1] == 0) root_ = k;
    }
  }

  const SkeletonTopology& topology() const { return topo_; }
  int num_joints() const { return topo_.num_joints; }
  int parent(int k) const { return topo_.parent[k - 1]; }
  int root() const { return root_; }
  /// Depth counted from the origin: depth(0) = 0, depth(root) = 1.
  int depth(int k) const { return depth_[k]; }
  /// Joints ordered so that every parent precedes its children.
  const std::vector<int>& root_first_order() const { return order_; }
  const std::vector<int>& limb_joints() const { return topo_.limb_joints; }

  std::string joint_name(int k) const {
    if (k == 0) return "origin";
    if (!topo_.joint_names.empty()) return topo_.joint_names[k - 1];
    return "joint_" + std::to_string(k);
  }

  /// Index of the joint with the given name, 0 when absent.
  int find_joint(const std::string& name) const {
    for (int k = 1; k <= num_joints(); ++k) {
      if (joint_name(k) == name) return k;
    }
    return 0;
  }

  bool contains(int k) const { return k >= 0 && k <= num_joints(); }

 private:
  int compute_depth(int k) {
    if (depth_[k] >= 0) return depth_[k];
    depth_[k] = compute_depth(parent(k)) + 1;
    return depth_[k];
  }

  SkeletonTopology topo_;
  std::vector<int> depth_;
  std::vector<int> order_;
  int root_ = 0;
};

/// Unique tree path for the relative position J_u - J_v. Ascends from v to the
/// lowest common ancestor (+B of each joint left behind), then descends to u
/// (-B of each joint entered). The origin is an ancestor of every joint.
inline TreePath path_between(const Skeleton& skel, int u, int v) {
  if (!skel.contains(u) || !skel.contains(v)) {
    throw Error(ErrorCode::IndexOutOfRange,
                "path endpoints (" + std::to_string(u) + "," + std::to_string(v) + ") outside 0.." +
                    std::to_string(skel.num_joints()));
  }
  if (u == v) throw Error(ErrorCode::IndexOutOfRange, "path endpoints must differ");

  std::vector<int> from_v;
  std::vector<int> from_u;
  int a = v;
  int b = u;
  while (skel.depth(a) > skel.depth(b)) {
    from_v.push_back(a);
    a = skel.parent(a);
  }
  while (skel.depth(b) > skel.depth(a)) {
    from_u.push_back(b);
    b = skel.parent(b);
  }
  while (a != b) {
    from_v.push_back(a);
    from_u.push_back(b);
    a = skel.parent(a);
    b = skel.parent(b);
  }

  TreePath path{u, v, {}};
  path.steps.reserve(from_v.size() + from_u.size());
  for (int bone : from_v) path.steps.push_back({bone, +1});
  for (auto it = from_u.rbegin(); it != from_u.rend(); ++it) path.steps.push_back({*it, -1});
  return path;
}

/// 17-joint Human3.6M-style layout rooted at the pelvis.
inline SkeletonTopology human36m_topology() {
  SkeletonTopology t;
  t.num_joints = 17;
  t.joint_names = {"pelvis",     "r_hip",    "r_knee",  "r_ankle",    "l_hip",   "l_knee",
                   "l_ankle",    "spine",    "thorax",  "neck",       "head",    "l_shoulder",
                   "l_elbow",    "l_wrist",  "r_shoulder", "r_elbow", "r_wrist"};
  t.parent = {0, 1, 2, 3, 1, 5, 6, 1, 8, 9, 10, 9, 12, 13, 9, 15, 16};
  // The bend angle of a limb joint k sits at parent(k): knees/ankles give the
  // hip/knee angles, elbows/wrists the shoulder/elbow angles.
  t.limb_joints = {3, 4, 6, 7, 13, 14, 16, 17};
  return t;
}

inline Skeleton human36m_skeleton() { return Skeleton(human36m_topology()); }

}  // namespace posekit
