#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "posekit/pair_set.hpp"
#include "posekit/skeleton.hpp"
#include "posekit/types.hpp"

namespace posekit {

inline BonePose joints_to_bones(const Coords& joints, const Skeleton& skel) {
  if (joints.rows() != skel.num_joints()) {
    throw Error(ErrorCode::ShapeMismatch, "pose has " + std::to_string(joints.rows()) + " joints, skeleton " +
                                              std::to_string(skel.num_joints()));
  }
  BonePose out{Coords(joints.rows(), joints.cols())};
  for (int k = 1; k <= skel.num_joints(); ++k) {
    const int p = skel.parent(k);
    if (p == 0) {
      out.bones.row(k - 1) = -joints.row(k - 1);
    } else {
      out.bones.row(k - 1) = joints.row(p - 1) - joints.row(k - 1);
    }
  }
  return out;
}

inline BonePose joints_to_bones(const Pose& pose, const Skeleton& skel) {
  return joints_to_bones(pose.joints, skel);
}

/// Root-first accumulation J_k = J_parent(k) - B_k.
inline Coords bones_to_joints(const Coords& bones, const Skeleton& skel) {
  if (bones.rows() != skel.num_joints()) {
    throw Error(ErrorCode::ShapeMismatch, "bone pose has " + std::to_string(bones.rows()) + " rows, skeleton " +
                                              std::to_string(skel.num_joints()));
  }
  Coords joints(bones.rows(), bones.cols());
  for (int k : skel.root_first_order()) {
    const int p = skel.parent(k);
    if (p == 0) {
      joints.row(k - 1) = -bones.row(k - 1);
    } else {
      joints.row(k - 1) = joints.row(p - 1) - bones.row(k - 1);
    }
  }
  return joints;
}

inline Pose bones_to_joints(const BonePose& bones, const Skeleton& skel) {
  return Pose{bones_to_joints(bones.bones, skel), {}, std::nullopt};
}

enum class StatsTarget { joints, bones, pair_deltas };

inline std::string_view to_string(StatsTarget t) {
  switch (t) {
    case StatsTarget::joints: return "joints";
    case StatsTarget::bones: return "bones";
    case StatsTarget::pair_deltas: return "pairs";
  }
  return "joints";
}

inline StatsTarget parse_stats_target(std::string_view name) {
  if (name == "joints") return StatsTarget::joints;
  if (name == "bones") return StatsTarget::bones;
  if (name == "pairs" || name == "pair_deltas") return StatsTarget::pair_deltas;
  throw Error(ErrorCode::InvalidConfig, "unknown stats target '" + std::string(name) + "'");
}

inline constexpr double kDefaultStdFloor = 1e-6;

/// Constant mean/std used to normalize one representation. Fitted on ground
/// truth only, population convention, std clamped at `std_floor`.
struct NormStats {
  StatsTarget target = StatsTarget::joints;
  Coords mean;
  Coords std;
  std::size_t count = 0;
  double std_floor = kDefaultStdFloor;
  bool pooled = false;
  /// For pair_deltas: the pair list the rows are keyed to.
  PairSetKind pair_kind = PairSetKind::custom;
  std::vector<JointPair> pairs;

  Eigen::Index rows() const { return mean.rows(); }
  Eigen::Index cols() const { return mean.cols(); }
};

struct StatsOptions {
  double std_floor = kDefaultStdFloor;
  /// Pair deltas share one per-coordinate mean/std pooled over all pairs
  /// instead of per-pair constants.
  bool pooled_pairs = false;
  /// Accept a mix of 2D and 3D samples: x/y columns are fitted on every
  /// sample and z only on the 3D ones.
  bool allow_mixed_dims = false;
};

namespace detail {

inline Coords target_values(const Coords& joints, StatsTarget target, const Skeleton& skel, const PairSet* ps) {
  switch (target) {
    case StatsTarget::joints: return joints;
    case StatsTarget::bones: return joints_to_bones(joints, skel).bones;
    case StatsTarget::pair_deltas: return pair_deltas(joints, *ps);
  }
  return joints;
}

}  // namespace detail

inline NormStats fit_stats(std::span<const Pose> ground_truth, StatsTarget target, const Skeleton& skel,
                           const PairSet* pair_set = nullptr, const StatsOptions& opts = {}) {
  if (ground_truth.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "at least two ground-truth samples are required");
  }
  if (target == StatsTarget::pair_deltas && pair_set == nullptr) {
    throw Error(ErrorCode::InvalidConfig, "pair-delta statistics need a pair set");
  }
  if (!(opts.std_floor > 0.0)) throw Error(ErrorCode::InvalidConfig, "std_floor must be positive");

  int max_dims = 0;
  bool mixed = false;
  for (const auto& p : ground_truth) {
    if (p.num_joints() != skel.num_joints()) {
      throw Error(ErrorCode::ShapeMismatch, "sample '" + p.meta.id + "' does not match the skeleton");
    }
    if (p.dims() != 2 && p.dims() != 3) throw Error(ErrorCode::ShapeMismatch, "dims must be 2 or 3");
    if (max_dims != 0 && p.dims() != max_dims) mixed = true;
    max_dims = std::max(max_dims, p.dims());
  }
  if (mixed && !opts.allow_mixed_dims) {
    throw Error(ErrorCode::MixedDims, "ground truth mixes 2D and 3D samples");
  }

  const Eigen::Index rows = target == StatsTarget::pair_deltas ? static_cast<Eigen::Index>(pair_set->size())
                                                               : skel.num_joints();
  Coords sum = Coords::Zero(rows, max_dims);
  Eigen::VectorXd n = Eigen::VectorXd::Zero(max_dims);
  std::vector<Coords> values;
  values.reserve(ground_truth.size());
  for (const auto& p : ground_truth) {
    values.push_back(detail::target_values(p.joints, target, skel, pair_set));
    const auto& x = values.back();
    sum.leftCols(x.cols()) += x;
    n.head(x.cols()).array() += 1.0;
  }
  for (int c = 0; c < max_dims; ++c) {
    if (n[c] < 2) throw Error(ErrorCode::InsufficientData, "fewer than two samples for coordinate " + std::to_string(c));
  }

  NormStats s;
  s.target = target;
  s.count = ground_truth.size();
  s.std_floor = opts.std_floor;
  s.mean = Coords(rows, max_dims);
  s.std = Coords(rows, max_dims);
  const bool pooled = target == StatsTarget::pair_deltas && opts.pooled_pairs;
  s.pooled = pooled;
  for (int c = 0; c < max_dims; ++c) {
    if (pooled) {
      s.mean.col(c).setConstant(sum.col(c).sum() / (n[c] * static_cast<double>(rows)));
    } else {
      s.mean.col(c) = sum.col(c) / n[c];
    }
  }
  Coords sq = Coords::Zero(rows, max_dims);
  for (const auto& x : values) {
    const auto centered = (x - s.mean.leftCols(x.cols())).array();
    sq.leftCols(x.cols()).array() += centered * centered;
  }
  for (int c = 0; c < max_dims; ++c) {
    if (pooled) {
      s.std.col(c).setConstant(std::sqrt(sq.col(c).sum() / (n[c] * static_cast<double>(rows))));
    } else {
      s.std.col(c) = (sq.col(c) / n[c]).cwiseSqrt();
    }
  }
  s.std = s.std.cwiseMax(opts.std_floor);
  if (target == StatsTarget::pair_deltas) {
    s.pair_kind = pair_set->kind;
    s.pairs = pair_set->pairs;
  }
  return s;
}

inline NormStats fit_stats(std::span<const Pose> ground_truth, const PairSet& pair_set, const Skeleton& skel,
                           const StatsOptions& opts = {}) {
  return fit_stats(ground_truth, StatsTarget::pair_deltas, skel, &pair_set, opts);
}

inline Coords normalize(const Coords& x, const NormStats& stats) {
  require_shape(x, stats.rows(), stats.cols(), "normalize");
  return ((x - stats.mean).array() / stats.std.array()).matrix();
}

inline Coords unnormalize(const Coords& x_normalized, const NormStats& stats) {
  require_shape(x_normalized, stats.rows(), stats.cols(), "unnormalize");
  return (x_normalized.array() * stats.std.array() + stats.mean.array()).matrix();
}

/// Throws StatsMismatch unless `stats` are pair-delta statistics keyed to
/// exactly this pair list.
inline void require_keyed_to(const NormStats& stats, const PairSet& ps) {
  if (stats.target != StatsTarget::pair_deltas || stats.pairs != ps.pairs) {
    throw Error(ErrorCode::StatsMismatch, "delta statistics were fitted for a different pair set");
  }
}

}  // namespace posekit
