#pragma once

#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "posekit/camera.hpp"
#include "posekit/skeleton.hpp"
#include "posekit/types.hpp"

namespace posekit {

/// Desk-scale articulated pose generator settings. Per-joint vectors have one
/// entry per joint (row k-1 for joint k).
struct SynthConfig {
  SkeletonTopology topology = human36m_topology();
  /// |B_k| in mm. The root entry is the pelvis distance from the origin and
  /// may be 0 (pelvis-centred frame); every other entry must be positive.
  std::vector<double> bone_lengths;
  /// Rest-pose direction of each joint from its parent (camera axes, y down).
  std::vector<Eigen::Vector3d> rest_directions;
  /// Maximum local rotation (degrees) of each joint's bone relative to its
  /// parent's frame. The root entry is the global yaw half-range.
  std::vector<double> angle_ranges;
  double noise = 30.0;
  int num_samples = 100;
  std::uint64_t seed = 0;
  double fraction_2d = 0.0;
  /// One subject per entry; subject s scales every bone length by the entry.
  std::vector<double> subject_scales = {1.0};
  /// Fixed camera used to emit 2D samples; the pelvis sits `camera_distance`
  /// mm in front of it.
  CameraIntrinsics camera{1145.0, 1145.0, 512.0, 512.0};
  double camera_distance = 5000.0;
};

/// Defaults for the built-in 17-joint layout.
inline SynthConfig default_synth_config() {
  SynthConfig c;
  c.topology = human36m_topology();
  const Eigen::Vector3d down(0, 1, 0), up(0, -1, 0), left(1, 0, 0), right(-1, 0, 0);
  //               pelvis r_hip  r_knee r_ankle l_hip  l_knee l_ankle spine thorax neck  head
  //               l_sh   l_elb  l_wri  r_sh   r_elb  r_wri
  c.bone_lengths = {0.0,   130.0, 450.0, 440.0,  130.0, 450.0, 440.0,  230.0, 250.0, 100.0, 110.0,
                    150.0, 280.0, 250.0, 150.0,  280.0, 250.0};
  c.rest_directions = {Eigen::Vector3d::Zero(), right, down, down, left, down, down, up, up, up, up,
                       left, down, down, right, down, down};
  c.angle_ranges = {180.0, 5.0, 30.0, 45.0, 5.0, 30.0, 45.0, 15.0, 15.0, 15.0, 20.0,
                    10.0,  45.0, 60.0, 10.0, 45.0, 60.0};
  c.subject_scales = {0.92, 1.0, 1.08};
  return c;
}

struct SynthDataset {
  std::vector<Pose> poses;
  /// Flattened ground-truth 3D joints plus Gaussian noise, one per pose.
  std::vector<Eigen::VectorXd> features;
};

inline void require_valid(const SynthConfig& c) {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (auto issue = validate(c.topology)) bad("topology: " + issue->message);
  const auto k = static_cast<std::size_t>(c.topology.num_joints);
  if (c.bone_lengths.size() != k || c.rest_directions.size() != k || c.angle_ranges.size() != k) {
    bad("bone_lengths, rest_directions and angle_ranges need one entry per joint");
  }
  for (std::size_t j = 0; j < k; ++j) {
    const bool is_root = c.topology.parent[j] == 0;
    if (!std::isfinite(c.bone_lengths[j]) || c.bone_lengths[j] < 0.0 || (!is_root && c.bone_lengths[j] <= 0.0)) {
      bad("bone length of joint " + std::to_string(j + 1) + " must be positive");
    }
    if (c.bone_lengths[j] > 0.0 && !(c.rest_directions[j].norm() > 0.0)) {
      bad("rest direction of joint " + std::to_string(j + 1) + " is zero");
    }
    if (!(c.angle_ranges[j] >= 0.0)) bad("angle ranges must be non-negative");
  }
  if (!(c.fraction_2d >= 0.0 && c.fraction_2d <= 1.0)) bad("fraction_2d must lie in [0, 1]");
  if (c.num_samples < 0) bad("num_samples must be non-negative");
  if (!(c.noise >= 0.0)) bad("noise must be non-negative");
  if (c.subject_scales.empty()) bad("at least one subject is required");
  for (double s : c.subject_scales) {
    if (!(s > 0.0)) bad("subject scales must be positive");
  }
  if (!(c.camera_distance > 0.0)) bad("camera_distance must be positive");
  require_valid(c.camera);
}

namespace detail {

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng, double max_degrees) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
  const double angle = unit(rng) * max_degrees * std::numbers::pi / 180.0;
  if (axis.norm() < 1e-12) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace detail

/// Forward-kinematics sampler: fixed bone lengths per subject, random local
/// rotations. Output is fully determined by the config (including its seed).
inline SynthDataset generate(const SynthConfig& c) {
  require_valid(c);
  const Skeleton skel(c.topology);
  const int k_count = skel.num_joints();
  const auto n = static_cast<std::size_t>(c.num_samples);
  const auto n_2d = static_cast<std::size_t>(std::llround(c.fraction_2d * static_cast<double>(n)));

  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  SynthDataset ds;
  ds.poses.reserve(n);
  ds.features.reserve(n);
  std::vector<Eigen::Matrix3d> frame(static_cast<std::size_t>(k_count) + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t subject = i % c.subject_scales.size();
    const double scale = c.subject_scales[subject];
    Coords joints(k_count, 3);
    for (int k : skel.root_first_order()) {
      const auto r = static_cast<std::size_t>(k - 1);
      const int p = skel.parent(k);
      Eigen::Matrix3d local;
      if (p == 0) {
        const double yaw = unit(rng) * c.angle_ranges[r] * std::numbers::pi / 180.0;
        local = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
      } else {
        local = detail::random_rotation(rng, c.angle_ranges[r]);
      }
      const Eigen::Matrix3d& parent_frame = p == 0 ? Eigen::Matrix3d::Identity() : frame[static_cast<std::size_t>(p)];
      frame[static_cast<std::size_t>(k)] = parent_frame * local;
      Eigen::Vector3d offset = Eigen::Vector3d::Zero();
      if (c.bone_lengths[r] > 0.0) {
        offset = frame[static_cast<std::size_t>(k)] * c.rest_directions[r].normalized() * (c.bone_lengths[r] * scale);
      }
      const Eigen::Vector3d base = p == 0 ? Eigen::Vector3d::Zero() : Eigen::Vector3d(joints.row(p - 1).transpose());
      joints.row(k - 1) = (base + offset).transpose();
    }

    Eigen::VectorXd feat(3 * k_count);
    for (int k = 0; k < k_count; ++k) {
      for (int d = 0; d < 3; ++d) feat[3 * k + d] = joints(k, d) + (c.noise > 0.0 ? c.noise * gauss(rng) : 0.0);
    }

    Pose pose;
    pose.meta.id = "synth_" + std::to_string(c.seed) + "_" + std::to_string(i);
    pose.meta.subject = "S" + std::to_string(subject + 1);
    // 2D samples are spread evenly through the sequence.
    const bool is_2d = n_2d > 0 && (i * n_2d) / n != ((i + 1) * n_2d) / n;
    if (is_2d) {
      Coords pixels(k_count, 2);
      for (int k = 0; k < k_count; ++k) {
        Eigen::Vector3d cam_pt = joints.row(k).transpose();
        cam_pt.z() += c.camera_distance;
        pixels.row(k) = project(cam_pt, c.camera).transpose();
      }
      pose.joints = std::move(pixels);
      pose.camera = c.camera;
    } else {
      pose.joints = std::move(joints);
    }
    ds.poses.push_back(std::move(pose));
    ds.features.push_back(std::move(feat));
  }
  return ds;
}

}  // namespace posekit
