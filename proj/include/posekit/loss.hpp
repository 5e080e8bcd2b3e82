#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "posekit/pair_set.hpp"
#include "posekit/representation.hpp"
#include "posekit/skeleton.hpp"
#include "posekit/types.hpp"

namespace posekit {

/// Value and subgradient of an L1 loss with respect to the normalized
/// prediction it was evaluated on.
struct LossResult {
  double value = 0.0;
  /// dL/d(normalized prediction), same shape as the prediction.
  Coords grad;
  /// Per-term contributions (one per pair, bone or joint) in listing order.
  std::vector<double> terms;
  /// Smallest |residual| over all active coordinates; L1 kinks sit at 0.
  double min_abs_residual = std::numeric_limits<double>::infinity();

  /// Reporting-only average over terms; never used for gradients.
  double mean_per_term() const { return terms.empty() ? 0.0 : value / static_cast<double>(terms.size()); }
};

namespace detail {

inline double l1_sign(double r) { return static_cast<double>((r > 0.0) - (r < 0.0)); }

inline void require_pred_shape(const Coords& pred, const Skeleton& skel, Eigen::Index cols, const char* what) {
  require_shape(pred, skel.num_joints(), cols, what);
  if (!pred.allFinite()) throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": non-finite prediction");
}

/// Shared kernel for the compositional loss. Only the first `active_cols`
/// coordinates contribute; the remaining gradient columns stay exactly zero.
inline LossResult compositional_kernel(const Coords& bones_normalized, const Coords& gt_joints,
                                       const PairSet& ps, const NormStats& bone_stats,
                                       const NormStats& delta_stats, Eigen::Index active_cols) {
  const Eigen::Index cols = bones_normalized.cols();
  require_shape(bone_stats.mean, bones_normalized.rows(), cols, "bone stats");
  require_keyed_to(delta_stats, ps);
  require_shape(delta_stats.mean, static_cast<Eigen::Index>(ps.size()), cols, "delta stats");

  const Coords bones = (bones_normalized.array() * bone_stats.std.array() + bone_stats.mean.array()).matrix();
  const Coords gt_delta = pair_deltas(gt_joints.leftCols(active_cols), ps);

  LossResult res;
  res.grad = Coords::Zero(bones_normalized.rows(), cols);
  res.terms.assign(ps.size(), 0.0);
  Eigen::RowVectorXd delta(active_cols);
  for (std::size_t i : ps.canonical_order) {
    const TreePath& path = ps.paths[i];
    delta.setZero();
    for (const PathStep& step : path.steps) {
      delta += static_cast<double>(step.sign) * bones.row(step.bone - 1).head(active_cols);
    }
    double term = 0.0;
    for (Eigen::Index c = 0; c < active_cols; ++c) {
      const double mu = delta_stats.mean(i, c);
      const double sigma = delta_stats.std(i, c);
      const double r = (delta[c] - mu) / sigma - (gt_delta(i, c) - mu) / sigma;
      term += std::abs(r);
      res.min_abs_residual = std::min(res.min_abs_residual, std::abs(r));
      const double outer = l1_sign(r) / sigma;
      if (outer == 0.0) continue;
      for (const PathStep& step : path.steps) {
        res.grad(step.bone - 1, c) += outer * static_cast<double>(step.sign) * bone_stats.std(step.bone - 1, c);
      }
    }
    res.terms[i] = term;
  }
  for (std::size_t i : ps.canonical_order) res.value += res.terms[i];
  return res;
}

inline LossResult direct_kernel(const Coords& pred_normalized, const Coords& gt_values, const NormStats& stats,
                                Eigen::Index active_cols) {
  require_shape(stats.mean, pred_normalized.rows(), pred_normalized.cols(), "stats");
  LossResult res;
  res.grad = Coords::Zero(pred_normalized.rows(), pred_normalized.cols());
  res.terms.assign(static_cast<std::size_t>(pred_normalized.rows()), 0.0);
  for (Eigen::Index k = 0; k < pred_normalized.rows(); ++k) {
    double term = 0.0;
    for (Eigen::Index c = 0; c < active_cols; ++c) {
      const double gt_n = (gt_values(k, c) - stats.mean(k, c)) / stats.std(k, c);
      const double r = pred_normalized(k, c) - gt_n;
      term += std::abs(r);
      res.min_abs_residual = std::min(res.min_abs_residual, std::abs(r));
      res.grad(k, c) = l1_sign(r);
    }
    res.terms[static_cast<std::size_t>(k)] = term;
    res.value += term;
  }
  return res;
}

inline void require_gt(const Pose& gt, const Skeleton& skel) {
  if (gt.num_joints() != skel.num_joints()) {
    throw Error(ErrorCode::ShapeMismatch, "ground truth '" + gt.meta.id + "' does not match the skeleton");
  }
}

}  // namespace detail

/// Relative position J_u - J_v composed from normalized bones along `path`,
/// in native units.
inline Eigen::RowVectorXd compose_delta(const Coords& bones_normalized, const TreePath& path,
                                        const NormStats& bone_stats) {
  require_shape(bones_normalized, bone_stats.rows(), bone_stats.cols(), "compose_delta");
  Eigen::RowVectorXd delta = Eigen::RowVectorXd::Zero(bones_normalized.cols());
  for (const PathStep& step : path.steps) {
    const auto r = static_cast<Eigen::Index>(step.bone - 1);
    delta += static_cast<double>(step.sign) *
             (bones_normalized.row(r).array() * bone_stats.std.row(r).array() + bone_stats.mean.row(r).array())
                 .matrix();
  }
  return delta;
}

/// Sum over pairs and coordinates of |normalized composed delta - normalized
/// ground-truth delta|, with its gradient w.r.t. the normalized bones.
inline LossResult compositional_loss(const Coords& bones_normalized, const Pose& gt, const Skeleton& skel,
                                     const PairSet& ps, const NormStats& bone_stats,
                                     const NormStats& delta_stats) {
  detail::require_gt(gt, skel);
  detail::require_pred_shape(bones_normalized, skel, gt.dims(), "compositional_loss");
  return detail::compositional_kernel(bones_normalized, gt.joints, ps, bone_stats, delta_stats, gt.dims());
}

/// Compositional loss split into an x/y part, always active, and a z part that
/// only 3D ground truth switches on. The prediction carries three coordinates.
inline LossResult mixed_loss(const Coords& bones_normalized, const Pose& gt, const Skeleton& skel,
                             const PairSet& ps, const NormStats& bone_stats, const NormStats& delta_stats) {
  detail::require_gt(gt, skel);
  detail::require_pred_shape(bones_normalized, skel, 3, "mixed_loss");
  if (gt.dims() != 2 && gt.dims() != 3) throw Error(ErrorCode::ShapeMismatch, "ground truth must be 2D or 3D");
  return detail::compositional_kernel(bones_normalized, gt.joints, ps, bone_stats, delta_stats, gt.dims());
}

/// Direct joint regression loss on normalized joints.
inline LossResult joint_loss(const Coords& pred_joints_normalized, const Pose& gt, const NormStats& joint_stats) {
  require_shape(pred_joints_normalized, gt.joints.rows(), gt.joints.cols(), "joint_loss");
  return detail::direct_kernel(pred_joints_normalized, gt.joints, joint_stats, gt.dims());
}

/// Joint loss for 3-coordinate predictions against 2D or 3D ground truth; the
/// z column is ignored for 2D samples.
inline LossResult mixed_joint_loss(const Coords& pred_joints_normalized, const Pose& gt,
                                   const NormStats& joint_stats) {
  require_shape(pred_joints_normalized, gt.joints.rows(), 3, "mixed_joint_loss");
  return detail::direct_kernel(pred_joints_normalized, gt.joints, joint_stats, gt.dims());
}

/// Independent per-bone loss on normalized bones.
inline LossResult bone_loss(const Coords& bones_normalized, const Pose& gt, const Skeleton& skel,
                            const NormStats& bone_stats) {
  detail::require_gt(gt, skel);
  detail::require_pred_shape(bones_normalized, skel, gt.dims(), "bone_loss");
  return detail::direct_kernel(bones_normalized, joints_to_bones(gt.joints, skel).bones, bone_stats, gt.dims());
}

/// Re-keys per-joint statistics as pair-delta statistics for the joint pair
/// set, where J_u - J_0 = J_u.
inline NormStats joint_stats_as_pair_stats(const NormStats& joint_stats, const PairSet& joint_pairs) {
  if (joint_stats.target != StatsTarget::joints) {
    throw Error(ErrorCode::StatsMismatch, "expected joint statistics");
  }
  NormStats s = joint_stats;
  s.target = StatsTarget::pair_deltas;
  s.pair_kind = joint_pairs.kind;
  s.pairs = joint_pairs.pairs;
  s.mean = Coords(static_cast<Eigen::Index>(joint_pairs.size()), joint_stats.cols());
  s.std = Coords(static_cast<Eigen::Index>(joint_pairs.size()), joint_stats.cols());
  for (std::size_t i = 0; i < joint_pairs.size(); ++i) {
    const auto [u, v] = joint_pairs.pairs[i];
    if (v != 0 || u < 1 || u > joint_stats.rows()) {
      throw Error(ErrorCode::StatsMismatch, "joint statistics only cover (u, 0) pairs");
    }
    s.mean.row(i) = joint_stats.mean.row(u - 1);
    s.std.row(i) = joint_stats.std.row(u - 1);
  }
  return s;
}

}  // namespace posekit
