#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "posekit/procrustes.hpp"
#include "posekit/representation.hpp"
#include "posekit/skeleton.hpp"
#include "posekit/types.hpp"

namespace posekit {

struct ErrorBreakdown {
  std::vector<double> per_item;
  /// 1-based joint index of each entry; a bone is keyed by its child joint.
  std::vector<int> joints;
  double mean = 0.0;
};

namespace detail {

inline void require_same_shape(const Pose& a, const Pose& b) {
  if (a.joints.rows() != b.joints.rows() || a.joints.cols() != b.joints.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction '" + a.meta.id + "' and ground truth '" + b.meta.id +
                                              "' differ in shape");
  }
}

// Row-wise distances; `skip_row` (1-based, 0 = none) is left out.
inline ErrorBreakdown row_distances(const Coords& a, const Coords& b, int skip_row = 0) {
  ErrorBreakdown out;
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    if (k + 1 == skip_row) continue;
    out.per_item.push_back((a.row(k) - b.row(k)).norm());
    out.joints.push_back(static_cast<int>(k) + 1);
    out.mean += out.per_item.back();
  }
  if (!out.per_item.empty()) out.mean /= static_cast<double>(out.per_item.size());
  return out;
}

inline ErrorBreakdown average(const std::vector<ErrorBreakdown>& items) {
  ErrorBreakdown out;
  if (items.empty()) return out;
  out.joints = items.front().joints;
  out.per_item.assign(items.front().per_item.size(), 0.0);
  for (const auto& e : items) {
    for (std::size_t k = 0; k < e.per_item.size(); ++k) out.per_item[k] += e.per_item[k];
    out.mean += e.mean;
  }
  const double n = static_cast<double>(items.size());
  for (double& v : out.per_item) v /= n;
  out.mean /= n;
  return out;
}

}  // namespace detail

/// Mean per joint position error.
inline ErrorBreakdown joint_error(const Pose& pred, const Pose& gt) {
  detail::require_same_shape(pred, gt);
  return detail::row_distances(pred.joints, gt.joints);
}

/// Per-sample mean over joints, then mean over samples.
inline ErrorBreakdown joint_error(std::span<const Pose> preds, std::span<const Pose> gts) {
  if (preds.size() != gts.size()) throw Error(ErrorCode::ShapeMismatch, "prediction and ground-truth counts differ");
  std::vector<ErrorBreakdown> items;
  items.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) items.push_back(joint_error(preds[i], gts[i]));
  return detail::average(items);
}

/// MPJPE after aligning the prediction onto the ground truth.
inline double pa_joint_error(const Pose& pred, const Pose& gt, bool with_scale = true) {
  detail::require_same_shape(pred, gt);
  if (gt.dims() != 3) throw Error(ErrorCode::ShapeMismatch, "PA joint error is defined for 3D poses only");
  const auto t = procrustes_align(pred.joints, gt.joints, with_scale);
  return detail::row_distances(t.apply(pred.joints), gt.joints).mean;
}

inline double pa_joint_error(std::span<const Pose> preds, std::span<const Pose> gts, bool with_scale = true) {
  if (preds.size() != gts.size()) throw Error(ErrorCode::ShapeMismatch, "prediction and ground-truth counts differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) sum += pa_joint_error(preds[i], gts[i], with_scale);
  return preds.empty() ? 0.0 : sum / static_cast<double>(preds.size());
}

/// Mean per bone position error over the K-1 non-root bones. The root's
/// entry J_0 - J_root is an absolute position, not a relative one, so it is
/// left out; this keeps the metric invariant to a global translation.
inline ErrorBreakdown bone_error(const Pose& pred, const Pose& gt, const Skeleton& skel) {
  detail::require_same_shape(pred, gt);
  return detail::row_distances(joints_to_bones(pred.joints, skel).bones, joints_to_bones(gt.joints, skel).bones,
                               skel.num_joints() > 1 ? skel.root() : 0);
}

inline ErrorBreakdown bone_error(std::span<const Pose> preds, std::span<const Pose> gts, const Skeleton& skel) {
  if (preds.size() != gts.size()) throw Error(ErrorCode::ShapeMismatch, "prediction and ground-truth counts differ");
  std::vector<ErrorBreakdown> items;
  items.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) items.push_back(bone_error(preds[i], gts[i], skel));
  return detail::average(items);
}

/// Bone length standard deviation: population std of |B_k| within each
/// subject, averaged over subjects, then over bones for the aggregate. The
/// root entry is skipped as in bone_error (unless it is the only bone).
inline ErrorBreakdown bone_std(std::span<const Pose> preds, const Skeleton& skel) {
  std::map<std::string, std::vector<Eigen::VectorXd>> by_subject;
  for (const auto& p : preds) {
    if (p.dims() != 3) throw Error(ErrorCode::ShapeMismatch, "bone std is defined for 3D poses only");
    by_subject[p.meta.subject].push_back(joints_to_bones(p.joints, skel).bones.rowwise().norm());
  }
  if (by_subject.empty()) throw Error(ErrorCode::InsufficientSamplesForSubject, "no samples");
  const auto bones = static_cast<Eigen::Index>(skel.num_joints());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(bones);
  for (const auto& [subject, lengths] : by_subject) {
    if (lengths.size() < 2) {
      throw Error(ErrorCode::InsufficientSamplesForSubject, "subject '" + subject + "' has fewer than two samples");
    }
    const double n = static_cast<double>(lengths.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(bones);
    for (const auto& l : lengths) mean += l;
    mean /= n;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(bones);
    for (const auto& l : lengths) var.array() += (l - mean).array().square();
    acc += (var / n).cwiseSqrt();
  }
  acc /= static_cast<double>(by_subject.size());
  const int skip = skel.num_joints() > 1 ? skel.root() : 0;
  ErrorBreakdown out;
  for (int k = 1; k <= skel.num_joints(); ++k) {
    if (k == skip) continue;
    out.per_item.push_back(acc[k - 1]);
    out.joints.push_back(k);
    out.mean += acc[k - 1];
  }
  out.mean /= static_cast<double>(out.per_item.size());
  return out;
}

struct AngleRange {
  double lo = 0.0;
  double hi = 180.0;
};

/// Static bend-angle ranges (degrees) keyed by limb joint index.
struct AngleLimits {
  std::map<int, AngleRange> ranges;
};

/// Generous static ranges for the built-in 17-joint layout.
inline AngleLimits default_angle_limits(const Skeleton& skel) {
  const std::map<std::string, AngleRange> by_name = {
      {"r_knee", {30.0, 170.0}},  {"l_knee", {30.0, 170.0}},  {"r_ankle", {30.0, 180.0}},
      {"l_ankle", {30.0, 180.0}}, {"l_elbow", {20.0, 180.0}}, {"r_elbow", {20.0, 180.0}},
      {"l_wrist", {25.0, 180.0}}, {"r_wrist", {25.0, 180.0}},
  };
  AngleLimits limits;
  for (int k : skel.limb_joints()) {
    auto it = by_name.find(skel.joint_name(k));
    limits.ranges[k] = it != by_name.end() ? it->second : AngleRange{};
  }
  return limits;
}

/// Angle (degrees) at parent(k) between the bone to joint k and the bone to
/// the grandparent; a straight limb measures 180. Empty when a bone has zero
/// length.
inline std::optional<double> bend_angle(const Coords& joints, const Skeleton& skel, int k) {
  const int p = skel.parent(k);
  if (p == 0) return std::nullopt;
  const int gp = skel.parent(p);
  const Eigen::RowVectorXd at_p = joints.row(p - 1);
  const Eigen::RowVectorXd to_child = joints.row(k - 1) - at_p;
  const Eigen::RowVectorXd to_gp = (gp == 0 ? Eigen::RowVectorXd::Zero(joints.cols()) : Eigen::RowVectorXd(joints.row(gp - 1))) - at_p;
  const double nc = to_child.norm();
  const double ng = to_gp.norm();
  constexpr double kMinLength = 1e-9;
  if (nc < kMinLength || ng < kMinLength) return std::nullopt;
  const double cosine = std::clamp(to_child.dot(to_gp) / (nc * ng), -1.0, 1.0);
  return std::acos(cosine) * 180.0 / std::numbers::pi;
}

struct IllegalAngleResult {
  double rate = 0.0;
  std::map<int, double> per_joint;
  std::size_t illegal = 0;
  std::size_t evaluated = 0;
  /// Joint-sample pairs skipped because a bone had zero length.
  std::size_t undefined = 0;
};

inline IllegalAngleResult illegal_angle_rate(std::span<const Pose> preds, const Skeleton& skel,
                                             const AngleLimits& limits) {
  for (int k : skel.limb_joints()) {
    if (!limits.ranges.contains(k)) {
      throw Error(ErrorCode::InvalidConfig, "no angle limits for limb joint '" + skel.joint_name(k) + "'");
    }
  }
  IllegalAngleResult out;
  std::map<int, std::pair<std::size_t, std::size_t>> counts;  // illegal, evaluated
  for (const auto& p : preds) {
    if (p.dims() != 3) throw Error(ErrorCode::ShapeMismatch, "illegal angle is defined for 3D poses only");
    for (int k : skel.limb_joints()) {
      const auto angle = bend_angle(p.joints, skel, k);
      if (!angle) {
        ++out.undefined;
        continue;
      }
      const auto& r = limits.ranges.at(k);
      const bool bad = *angle < r.lo || *angle > r.hi;
      auto& c = counts[k];
      c.first += bad ? 1 : 0;
      c.second += 1;
      out.illegal += bad ? 1 : 0;
      out.evaluated += 1;
    }
  }
  for (int k : skel.limb_joints()) {
    const auto& c = counts[k];
    out.per_joint[k] = c.second == 0 ? 0.0 : static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  out.rate = out.evaluated == 0 ? 0.0 : static_cast<double>(out.illegal) / static_cast<double>(out.evaluated);
  return out;
}

struct MetricsReport {
  int dims = 3;
  std::size_t num_samples = 0;
  ErrorBreakdown joint_error;
  ErrorBreakdown bone_error;
  std::optional<double> pa_joint_error;
  bool pa_with_scale = true;
  std::optional<ErrorBreakdown> bone_std;
  std::optional<IllegalAngleResult> illegal_angle;
  std::vector<std::string> notes;
};

struct EvalOptions {
  std::optional<AngleLimits> angle_limits;
  bool pa_with_scale = true;
};

/// Full evaluation suite over paired predictions and ground truth. 3D-only
/// metrics are left empty for 2D data; bone std is left empty (with a note)
/// when a subject has fewer than two samples.
inline MetricsReport evaluate(std::span<const Pose> preds, std::span<const Pose> gts, const Skeleton& skel,
                              const EvalOptions& opts = {}) {
  if (preds.size() != gts.size()) throw Error(ErrorCode::ShapeMismatch, "prediction and ground-truth counts differ");
  if (preds.empty()) throw Error(ErrorCode::InsufficientData, "nothing to evaluate");
  MetricsReport rep;
  rep.dims = gts.front().dims();
  rep.num_samples = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    detail::require_same_shape(preds[i], gts[i]);
    if (gts[i].dims() != rep.dims) throw Error(ErrorCode::MixedDims, "evaluation set mixes 2D and 3D samples");
    if (gts[i].num_joints() != skel.num_joints()) throw Error(ErrorCode::ShapeMismatch, "skeleton mismatch");
  }
  rep.joint_error = joint_error(preds, gts);
  rep.bone_error = bone_error(preds, gts, skel);
  rep.pa_with_scale = opts.pa_with_scale;
  if (rep.dims == 3) {
    rep.pa_joint_error = pa_joint_error(preds, gts, opts.pa_with_scale);
    try {
      rep.bone_std = bone_std(preds, skel);
      rep.notes.push_back("bone_std: per-subject population std of bone length, averaged over subjects then bones");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientSamplesForSubject) throw;
      rep.notes.push_back(std::string("bone_std unavailable: ") + e.what());
    }
    if (!skel.limb_joints().empty()) {
      const AngleLimits limits = opts.angle_limits ? *opts.angle_limits : default_angle_limits(skel);
      rep.illegal_angle = illegal_angle_rate(preds, skel, limits);
      rep.notes.push_back("illegal_angle: static-limit checker");
    }
  }
  return rep;
}

}  // namespace posekit
