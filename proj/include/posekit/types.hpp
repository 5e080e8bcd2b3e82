#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>

#include "posekit/error.hpp"

namespace posekit {

/// Row-per-joint coordinate block (K x dims).
using Coords = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

struct SampleMeta {
  std::string id;
  std::string subject;
};

/// Joint coordinates of one sample. Joint k (1-based) lives in row k-1; the
/// origin J_0 is never stored and is always the zero vector of the frame.
/// 3D poses are in millimetres, 2D poses in pixels.
struct Pose {
  Coords joints;
  SampleMeta meta;
  std::optional<CameraIntrinsics> camera;

  int num_joints() const { return static_cast<int>(joints.rows()); }
  int dims() const { return static_cast<int>(joints.cols()); }
};

/// Bone vectors B_k = J_parent(k) - J_k, row k-1, same units as the source pose.
struct BonePose {
  Coords bones;

  int num_joints() const { return static_cast<int>(bones.rows()); }
  int dims() const { return static_cast<int>(bones.cols()); }
};

inline bool all_finite(const Coords& c) { return c.allFinite(); }

inline void require_shape(const Coords& c, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (c.rows() != rows || c.cols() != cols) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(what) + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                    ", got " + std::to_string(c.rows()) + "x" + std::to_string(c.cols()));
  }
}

}  // namespace posekit
