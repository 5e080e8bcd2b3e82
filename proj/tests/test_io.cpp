#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "posekit/io.hpp"

using namespace posekit;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "posekit_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Io, PoseRoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  std::vector<Pose> poses;
  for (int i = 0; i < 20; ++i) {
    Pose p = oracle::random_pose(rng, 17, i % 2 ? 2 : 3, 1234.5678);
    p.meta = {"id" + std::to_string(i), "S" + std::to_string(i % 3)};
    if (i % 2) p.camera = CameraIntrinsics{1145.04, 1143.78, 512.54, 515.45};
    poses.push_back(std::move(p));
  }
  const auto path = temp_file("poses.jsonl").string();
  io::write_poses(path, poses);
  const auto back = io::read_poses(path);
  ASSERT_EQ(back.size(), poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_EQ(back[i].meta.id, poses[i].meta.id);
    EXPECT_EQ(back[i].meta.subject, poses[i].meta.subject);
    EXPECT_TRUE((back[i].joints.array() == poses[i].joints.array()).all());
    EXPECT_EQ(back[i].camera.has_value(), poses[i].camera.has_value());
  }
}

TEST(Io, MalformedLineIsNamed) {
  const auto path = temp_file("bad.jsonl").string();
  {
    std::ofstream out(path);
    out << R"({"id":"a","joints":[[0,0,0]]})" << '\n' << '\n' << R"({"id":"b","joints":[[0,0)" << '\n';
  }
  try {
    io::read_poses(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedInput);
    EXPECT_NE(std::string(e.what()).find(path + ":3"), std::string::npos) << e.what();
  }
}

TEST(Io, RejectsRaggedRowsAndBadDims) {
  EXPECT_THROW(io::pose_from_json(io::json::parse(R"({"joints":[[0,0,0],[1,1]]})")), Error);
  EXPECT_THROW(io::pose_from_json(io::json::parse(R"({"dims":2,"joints":[[0,0,0]]})")), Error);
  EXPECT_THROW(io::pose_from_json(io::json::parse(R"({"joints":[[0,"x",0]]})")), Error);
  EXPECT_THROW(io::pose_from_json(io::json::parse(R"({"bones":[[0,0,0]]})")), Error);
}

TEST(Io, StatsRoundTrip) {
  std::mt19937_64 rng(2);
  const Skeleton s = human36m_skeleton();
  std::vector<Pose> gt;
  for (int i = 0; i < 10; ++i) gt.push_back(oracle::random_pose(rng, 17, 3));
  const auto ps = build_pair_set(PairSetKind::both, s);
  const auto st = fit_stats(gt, ps, s);
  const auto back = io::stats_from_json(io::json::parse(io::to_json(st).dump()));
  EXPECT_EQ(back.target, StatsTarget::pair_deltas);
  EXPECT_EQ(back.pairs, st.pairs);
  EXPECT_EQ(back.pair_kind, PairSetKind::both);
  EXPECT_TRUE((back.mean.array() == st.mean.array()).all());
  EXPECT_TRUE((back.std.array() == st.std.array()).all());
}

TEST(Io, SkeletonAndLimits) {
  const Skeleton s = human36m_skeleton();
  const auto t = io::topology_from_json(io::to_json(s.topology()));
  EXPECT_EQ(t.parent, s.topology().parent);
  EXPECT_EQ(t.joint_names, s.topology().joint_names);
  const auto lim = default_angle_limits(s);
  const auto back = io::angle_limits_from_json(io::to_json(lim, s), s);
  EXPECT_EQ(back.ranges.size(), lim.ranges.size());
  EXPECT_THROW(io::angle_limits_from_json(io::json::parse(R"({"nose":[0,10]})"), s), Error);
  EXPECT_THROW(io::angle_limits_from_json(io::json::parse(R"({"l_knee":[100,10]})"), s), Error);
}

TEST(Io, SynthConfigOverridesDefaults) {
  const auto c = io::synth_config_from_json(io::json::parse(R"({"num_samples":7,"noise":0,"seed":42})"));
  EXPECT_EQ(c.num_samples, 7);
  EXPECT_EQ(c.noise, 0.0);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.bone_lengths, default_synth_config().bone_lengths);
  const auto again = io::synth_config_from_json(io::to_json(c));
  EXPECT_EQ(again.angle_ranges, c.angle_ranges);
}
