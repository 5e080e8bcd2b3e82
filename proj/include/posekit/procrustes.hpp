#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>

#include "posekit/types.hpp"

namespace posekit {

/// x -> scale * rotation * x + translation
struct SimilarityTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double scale = 1.0;

  Coords apply(const Coords& points) const {
    Coords out = (scale * points * rotation.transpose()).rowwise() + translation.transpose();
    return out;
  }
};

/// Least-squares alignment of `source` onto `target` (rows are 3D points).
/// Reflections are never returned; `with_scale` adds a uniform scale factor.
inline SimilarityTransform procrustes_align(const Coords& source, const Coords& target, bool with_scale) {
  if (source.cols() != 3 || target.cols() != 3 || source.rows() != target.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "procrustes needs two N x 3 point sets of equal size");
  }
  if (source.rows() < 3) throw Error(ErrorCode::DegenerateConfiguration, "need at least three points");

  const Eigen::RowVector3d mu_s = source.colwise().mean();
  const Eigen::RowVector3d mu_t = target.colwise().mean();
  const Coords src = source.rowwise() - mu_s;
  const Coords tgt = target.rowwise() - mu_t;

  Eigen::JacobiSVD<Eigen::Matrix3d> tgt_svd(tgt.transpose() * tgt);
  const auto spread = tgt_svd.singularValues();
  if (!(spread[0] > 0.0) || spread[1] <= 1e-12 * spread[0]) {
    throw Error(ErrorCode::DegenerateConfiguration, "ground-truth points are collinear or coincident");
  }

  const Eigen::Matrix3d cov = tgt.transpose() * src;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d d = Eigen::Vector3d::Ones();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d[2] = -1.0;

  SimilarityTransform t;
  t.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  if (with_scale) {
    const double src_var = src.squaredNorm();
    if (!(src_var > 0.0)) throw Error(ErrorCode::DegenerateConfiguration, "predicted points are coincident");
    t.scale = svd.singularValues().dot(d) / src_var;
  }
  t.translation = mu_t.transpose() - t.scale * t.rotation * mu_s.transpose();
  return t;
}

}  // namespace posekit
