#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "posekit/camera.hpp"
#include "posekit/metrics.hpp"
#include "posekit/synth.hpp"

using namespace posekit;

namespace {

Pose make_pose(Coords c, std::string subject = "S1") { return Pose{std::move(c), {"", std::move(subject)}, std::nullopt}; }

// joints 1-2-3 in a chain; joint 3 is a limb joint whose angle sits at joint 2
Skeleton arm() { return Skeleton(SkeletonTopology{3, {0, 1, 2}, {"shoulder", "elbow", "wrist"}, {3}}); }

Coords arm_pose(double degrees) {
  const double a = degrees * std::numbers::pi / 180.0;
  Coords j(3, 3);
  j << -1, 0, 0, 0, 0, 0, -std::cos(a), std::sin(a), 0;
  return j;
}

}  // namespace

TEST(JointError, ThreeFourFive) {
  Coords g = Coords::Zero(4, 2);
  Coords p = g;
  p.row(2) << 3, 4;
  const auto e = joint_error(make_pose(p), make_pose(g));
  EXPECT_DOUBLE_EQ(e.per_item[2], 5.0);
  EXPECT_DOUBLE_EQ(e.mean, 5.0 / 4.0);
  EXPECT_EQ(joint_error(make_pose(g), make_pose(g)).mean, 0.0);
  EXPECT_THROW(joint_error(make_pose(Coords::Zero(3, 2)), make_pose(g)), Error);
}

TEST(JointError, MatchesOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Coords a = oracle::random_coords(rng, 8, 3), b = oracle::random_coords(rng, 8, 3);
    ASSERT_NEAR(joint_error(make_pose(a), make_pose(b)).mean, oracle::oracle_mpjpe(a, b), 1e-12 * oracle::oracle_mpjpe(a, b));
  }
}

TEST(JointError, BatchAveragesSampleFirst) {
  std::mt19937_64 rng(2);
  std::vector<Pose> p, g;
  double expect = 0.0;
  for (int i = 0; i < 5; ++i) {
    p.push_back(make_pose(oracle::random_coords(rng, 6, 3)));
    g.push_back(make_pose(oracle::random_coords(rng, 6, 3)));
    expect += oracle::oracle_mpjpe(p.back().joints, g.back().joints) / 5.0;
  }
  EXPECT_NEAR(joint_error(p, g).mean, expect, 1e-10);
}

TEST(PaJointError, RigidAndSimilarityMotionsVanish) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> sc(0.3, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Coords g = oracle::random_coords(rng, 17, 3);
    const Eigen::Matrix3d r = oracle::random_rotation(rng);
    const Eigen::RowVector3d t = oracle::random_coords(rng, 1, 3, 1000.0).row(0);
    const Coords rigid = ((g * r.transpose()).rowwise() + t);
    ASSERT_LE(pa_joint_error(make_pose(rigid), make_pose(g), false), 1e-8);
    ASSERT_LE(pa_joint_error(make_pose(rigid), make_pose(g), true), 1e-8);
    const Coords sim = ((sc(rng) * g * r.transpose()).rowwise() + t);
    ASSERT_LE(pa_joint_error(make_pose(sim), make_pose(g), true), 1e-8);
  }
}

TEST(PaJointError, ScaleFlag) {
  std::mt19937_64 rng(4);
  const Coords g = oracle::random_coords(rng, 17, 3);
  const Coords p = 2.0 * g;
  EXPECT_LE(pa_joint_error(make_pose(p), make_pose(g), true), 1e-8);
  const double off = pa_joint_error(make_pose(p), make_pose(g), false);
  EXPECT_GT(off, 1.0);
  EXPECT_NEAR(off, oracle::oracle_pa_mpjpe(p, g, false), 1e-9);
  EXPECT_LE(pa_joint_error(make_pose(g), make_pose(g), true), 1e-9);
  EXPECT_LE(pa_joint_error(make_pose(g), make_pose(g), false), 1e-9);
}

TEST(PaJointError, MatchesQuaternionOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Coords g = oracle::random_coords(rng, 17, 3);
    const Coords p = g + oracle::random_coords(rng, 17, 3, 40.0);
    for (bool s : {true, false}) {
      const double want = oracle::oracle_pa_mpjpe(p, g, s);
      ASSERT_NEAR(pa_joint_error(make_pose(p), make_pose(g), s), want, 1e-9 * std::max(1.0, want));
    }
    ASSERT_LE(pa_joint_error(make_pose(p), make_pose(g), true), joint_error(make_pose(p), make_pose(g)).mean);
  }
}

TEST(PaJointError, Degenerate) {
  Coords line(4, 3);
  line << 0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3;
  try {
    pa_joint_error(make_pose(line), make_pose(line));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }
  EXPECT_THROW(pa_joint_error(make_pose(Coords::Ones(2, 3)), make_pose(Coords::Ones(2, 3))), Error);
}

TEST(BoneError, TranslationInvariantAndOracle) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Skeleton s(oracle::random_topology(rng, 8));
    const Coords g = oracle::random_coords(rng, 8, 3);
    const Eigen::RowVector3d off(3, 4, 12);
    const Coords shifted = g.rowwise() + off;
    ASSERT_LE(bone_error(make_pose(shifted), make_pose(g), s).mean, 1e-12);
    ASSERT_NEAR(joint_error(make_pose(shifted), make_pose(g)).mean, 13.0, 1e-12);
    const Coords p = oracle::random_coords(rng, 8, 3);
    const double want = oracle::oracle_bone_error(p, g, s.topology().parent);
    ASSERT_NEAR(bone_error(make_pose(p), make_pose(g), s).mean, want, 1e-10 * want);
    const Coords moved = p.rowwise() + Eigen::RowVector3d(oracle::random_coords(rng, 1, 3, 500.0).row(0));
    ASSERT_NEAR(bone_error(make_pose(moved), make_pose(g), s).mean, want, 1e-10 * want);
  }
}

TEST(BoneStd, TwoLengthsOneSubject) {
  const Skeleton s(SkeletonTopology{1, {0}, {}, {}});
  Coords a(1, 3), b(1, 3);
  a << 10, 0, 0;
  b << 0, 12, 0;
  std::vector<Pose> preds{make_pose(a), make_pose(b)};
  EXPECT_DOUBLE_EQ(bone_std(preds, s).mean, 1.0);
}

TEST(BoneStd, FixedLengthsPerSubjectGiveZero) {
  SynthConfig cfg = default_synth_config();
  cfg.num_samples = 300;
  cfg.seed = 4;
  const auto ds = generate(cfg);
  const Skeleton s(cfg.topology);
  EXPECT_LE(bone_std(ds.poses, s).mean, 1e-9);
  // pooled across subjects the lengths do vary
  std::vector<Pose> merged = ds.poses;
  for (auto& p : merged) p.meta.subject = "all";
  EXPECT_GT(bone_std(merged, s).mean, 1.0);
}

TEST(BoneStd, InsufficientSamples) {
  const Skeleton s(SkeletonTopology{1, {0}, {}, {}});
  std::vector<Pose> preds{make_pose(Coords::Ones(1, 3), "A"), make_pose(Coords::Ones(1, 3), "A"),
                          make_pose(Coords::Ones(1, 3), "B")};
  try {
    bone_std(preds, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientSamplesForSubject);
  }
}

TEST(IllegalAngle, StraightArmIsLegalAtBoundary) {
  const auto s = arm();
  EXPECT_NEAR(*bend_angle(arm_pose(180.0), s, 3), 180.0, 1e-9);
  AngleLimits lim;
  lim.ranges[3] = {0.0, 180.0};
  std::vector<Pose> preds{make_pose(arm_pose(180.0))};
  const auto r = illegal_angle_rate(preds, s, lim);
  EXPECT_EQ(r.illegal, 0u);
  EXPECT_EQ(r.rate, 0.0);
}

TEST(IllegalAngle, OutsideRangeIsIllegal) {
  const auto s = arm();
  AngleLimits lim;
  lim.ranges[3] = {0.0, 150.0};
  std::vector<Pose> preds{make_pose(arm_pose(170.0)), make_pose(arm_pose(90.0))};
  const auto r = illegal_angle_rate(preds, s, lim);
  EXPECT_EQ(r.illegal, 1u);
  EXPECT_EQ(r.evaluated, 2u);
  EXPECT_DOUBLE_EQ(r.rate, 0.5);
  EXPECT_DOUBLE_EQ(r.per_joint.at(3), 0.5);
}

TEST(IllegalAngle, ZeroLengthBoneCountedUndefined) {
  const auto s = arm();
  AngleLimits lim;
  lim.ranges[3] = {0.0, 150.0};
  Coords j = arm_pose(90.0);
  j.row(2) = j.row(1);
  std::vector<Pose> preds{make_pose(j), make_pose(arm_pose(170.0))};
  const auto r = illegal_angle_rate(preds, s, lim);
  EXPECT_EQ(r.undefined, 1u);
  EXPECT_EQ(r.evaluated, 1u);
  EXPECT_DOUBLE_EQ(r.rate, 1.0);
}

TEST(IllegalAngle, MissingLimitsRejected) {
  std::vector<Pose> preds{make_pose(arm_pose(90.0))};
  EXPECT_THROW(illegal_angle_rate(preds, arm(), AngleLimits{}), Error);
}

TEST(IllegalAngle, SyntheticRestPosesAreLegal) {
  SynthConfig cfg = default_synth_config();
  cfg.num_samples = 500;
  for (auto& r : cfg.angle_ranges) r = std::min(r, 10.0);
  const auto ds = generate(cfg);
  const Skeleton s(cfg.topology);
  EXPECT_EQ(illegal_angle_rate(ds.poses, s, default_angle_limits(s)).rate, 0.0);
}

TEST(Evaluate, ReportCarriesNotes) {
  SynthConfig cfg = default_synth_config();
  cfg.num_samples = 30;
  const auto ds = generate(cfg);
  const Skeleton s(cfg.topology);
  const auto rep = evaluate(ds.poses, ds.poses, s);
  EXPECT_EQ(rep.joint_error.mean, 0.0);
  EXPECT_EQ(rep.bone_error.mean, 0.0);
  ASSERT_TRUE(rep.pa_joint_error);
  EXPECT_LE(*rep.pa_joint_error, 1e-9);
  ASSERT_TRUE(rep.bone_std);
  EXPECT_FALSE(rep.notes.empty());
  EXPECT_EQ(rep.joint_error.per_item.size(), 17u);
  // the root has no parent bone to compare
  EXPECT_EQ(rep.bone_error.per_item.size(), 16u);
  EXPECT_EQ(rep.bone_std->per_item.size(), 16u);
  EXPECT_EQ(std::count(rep.bone_error.joints.begin(), rep.bone_error.joints.end(), s.root()), 0);
}

TEST(Camera, Backproject) {
  const CameraIntrinsics cam{1000, 1000, 0, 0};
  EXPECT_EQ(backproject({100, 0}, 2000, cam), Eigen::Vector3d(200, 0, 2000));
  const CameraIntrinsics c2{1145, 1140, 512, 500};
  EXPECT_EQ(backproject({512, 500}, 3000, c2), Eigen::Vector3d(0, 0, 3000));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> xy(-1000, 1000), z(500, 8000);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d p(xy(rng), xy(rng), z(rng));
    ASSERT_LE((backproject(project(p, c2), p.z(), c2) - p).norm(), 1e-9);
  }
}

TEST(Camera, Errors) {
  try {
    backproject({0, 0}, 0.0, CameraIntrinsics{1, 1, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveDepth);
  }
  try {
    backproject({0, 0}, 1.0, CameraIntrinsics{0, 1, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidIntrinsics);
  }
}
