#pragma once

#include <Eigen/Core>

#include <span>
#include <string>

#include "posekit/types.hpp"

namespace posekit {

inline void require_valid(const CameraIntrinsics& cam) {
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0) || !std::isfinite(cam.cx) || !std::isfinite(cam.cy)) {
    throw Error(ErrorCode::InvalidIntrinsics, "focal lengths must be positive and the principal point finite");
  }
}

/// Pinhole back-projection of pixel (u, v) at depth z (mm) into camera space.
inline Eigen::Vector3d backproject(const Eigen::Vector2d& pixel, double depth, const CameraIntrinsics& cam) {
  require_valid(cam);
  if (!(depth > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "depth must be positive, got " + std::to_string(depth));
  return {(pixel.x() - cam.cx) * depth / cam.fx, (pixel.y() - cam.cy) * depth / cam.fy, depth};
}

inline Eigen::Vector2d project(const Eigen::Vector3d& point, const CameraIntrinsics& cam) {
  require_valid(cam);
  if (!(point.z() > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "point is not in front of the camera");
  return {cam.fx * point.x() / point.z() + cam.cx, cam.fy * point.y() / point.z() + cam.cy};
}

/// Lifts a 2D pixel pose to camera-space millimetres given per-joint depths.
inline Coords backproject_pose(const Coords& pixels, std::span<const double> depths, const CameraIntrinsics& cam) {
  if (pixels.cols() != 2 || static_cast<Eigen::Index>(depths.size()) != pixels.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "backproject needs K x 2 pixels and K depths");
  }
  Coords out(pixels.rows(), 3);
  for (Eigen::Index k = 0; k < pixels.rows(); ++k) {
    out.row(k) = backproject(pixels.row(k).transpose(), depths[static_cast<std::size_t>(k)], cam).transpose();
  }
  return out;
}

}  // namespace posekit
