// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "posekit/io.hpp"

using namespace posekit;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s criterion %2d  %-28s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Outcome round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> kd(1, 32), dd(2, 3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int k = kd(rng);
    const Skeleton s(oracle::random_topology(rng, k));
    const Coords j = oracle::random_coords(rng, k, dd(rng));
    worst = std::max(worst, (bones_to_joints(joints_to_bones(j, s).bones, s) - j).cwiseAbs().maxCoeff());
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 5.0, fmt("max abs err %.3g, %.2f s < 5 s", worst, t)};
}

Outcome composition_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<int> kd(1, 8);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int k = kd(rng);
    const Skeleton s(oracle::random_topology(rng, k));
    const Coords j = oracle::random_coords(rng, k, 3);
    const auto bs = oracle::random_stats(rng, StatsTarget::bones, k, 3);
    const Coords bn = normalize(joints_to_bones(j, s).bones, bs);
    for (int u = 0; u <= k; ++u) {
      for (int v = 0; v <= k; ++v) {
        if (u == v) continue;
        const Eigen::RowVectorXd want = oracle::joint_or_origin(j, u) - oracle::joint_or_origin(j, v);
        const double err = (compose_delta(bn, path_between(s, u, v), bs) - want).norm() / std::max(1.0, want.norm());
        worst = std::max(worst, err);
      }
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-9 && t < 10.0, fmt("max rel err %.3g, %.2f s < 10 s", worst, t)};
}

Outcome loss_equivalences() {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> kd(1, 17);
  double worst_bone = 0.0, worst_joint = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int k = kd(rng);
    const Skeleton s(oracle::random_topology(rng, k));
    const Pose gt = oracle::random_pose(rng, k, 3);
    const auto bs = oracle::random_stats(rng, StatsTarget::bones, k, 3);
    const Coords bn = oracle::random_coords(rng, k, 3, 1.0);
    const auto bone_ps = build_pair_set(PairSetKind::bone, s);
    NormStats ds = bs;
    ds.target = StatsTarget::pair_deltas;
    ds.pair_kind = bone_ps.kind;
    ds.pairs = bone_ps.pairs;
    ds.mean = -bs.mean;
    const double c = compositional_loss(bn, gt, s, bone_ps, bs, ds).value;
    const double b = bone_loss(bn, gt, s, bs).value;
    worst_bone = std::max(worst_bone, std::abs(c - b) / std::max(1.0, b));

    const Coords pred = oracle::random_coords(rng, k, 3);
    const auto js = oracle::random_stats(rng, StatsTarget::joints, k, 3);
    const auto joint_ps = build_pair_set(PairSetKind::joint, s);
    NormStats unit;
    unit.target = StatsTarget::bones;
    unit.mean = Coords::Zero(k, 3);
    unit.std = Coords::Ones(k, 3);
    const double cj =
        compositional_loss(joints_to_bones(pred, s).bones, gt, s, joint_ps, unit, joint_stats_as_pair_stats(js, joint_ps))
            .value;
    const double jj = joint_loss(normalize(pred, js), gt, js).value;
    worst_joint = std::max(worst_joint, std::abs(cj - jj) / std::max(1.0, jj));
  }
  return {worst_bone <= 1e-12 && worst_joint <= 1e-12, fmt("bone rel %.3g, joint rel %.3g (<= 1e-12)", worst_bone, worst_joint)};
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(104);
  const Skeleton s = human36m_skeleton();
  const PairSetKind kinds[] = {PairSetKind::joint, PairSetKind::bone, PairSetKind::both, PairSetKind::all};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    // instances cycle through the four pair sets, each on full-3D and on mixed 2D truth
    const PairSetKind kind = kinds[i % 4];
    const bool two_d = (i / 4) % 2 == 1;
    const auto ps = build_pair_set(kind, s);
    const auto bs = oracle::random_stats(rng, StatsTarget::bones, 17, 3);
    const auto ds = oracle::random_delta_stats(rng, ps, 3);
    Pose gt = oracle::random_pose(rng, 17, 3);
    if (two_d) gt.joints = Coords(gt.joints.leftCols(2));
    auto fn = [&](const Coords& b) {
      return two_d ? mixed_loss(b, gt, s, ps, bs, ds) : compositional_loss(b, gt, s, ps, bs, ds);
    };
    const Coords x = oracle::sample_away_from_kinks(
        rng, [](std::mt19937_64& r) { return oracle::random_coords(r, 17, 3, 1.0); }, fn);
    worst = std::max(worst, finite_difference_check(fn, x).max_relative_error);
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-5 && t < 30.0, fmt("max rel err %.3g, %.2f s < 30 s", worst, t)};
}

Outcome mixed_contract() {
  std::mt19937_64 rng(105);
  const Skeleton s = human36m_skeleton();
  bool zero_grad = true, invariant = true;
  for (int i = 0; i < 100; ++i) {
    const auto ps = build_pair_set(i % 2 ? PairSetKind::all : PairSetKind::both, s);
    const auto bs = oracle::random_stats(rng, StatsTarget::bones, 17, 3);
    const auto ds = oracle::random_delta_stats(rng, ps, 3);
    const Pose gt = oracle::random_pose(rng, 17, 2);
    const Coords bn = oracle::random_coords(rng, 17, 3, 1.0);
    const auto a = mixed_loss(bn, gt, s, ps, bs, ds);
    zero_grad = zero_grad && (a.grad.col(2).array() == 0.0).all() && !std::signbit(a.grad.col(2).maxCoeff());
    Coords moved = bn;
    moved.col(2) = oracle::random_coords(rng, 17, 1, 1e4);
    invariant = invariant && mixed_loss(moved, gt, s, ps, bs, ds).value == a.value;
  }
  return {zero_grad && invariant, std::string("z grad bitwise 0: ") + (zero_grad ? "yes" : "no") +
                                      ", z-invariant value: " + (invariant ? "yes" : "no")};
}

Outcome procrustes() {
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> sc(0.2, 5.0);
  auto pose = [](const Coords& c) { return Pose{c, {}, std::nullopt}; };
  double worst_rigid = 0.0, worst_oracle = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Coords g = oracle::random_coords(rng, 17, 3);
    const Eigen::Matrix3d r = oracle::random_rotation(rng);
    const Eigen::RowVector3d t = oracle::random_coords(rng, 1, 3, 1000.0).row(0);
    const Coords rigid = (g * r.transpose()).rowwise() + t;
    const Coords sim = (sc(rng) * g * r.transpose()).rowwise() + t;
    worst_rigid = std::max({worst_rigid, pa_joint_error(pose(rigid), pose(g), false),
                            pa_joint_error(pose(rigid), pose(g), true), pa_joint_error(pose(sim), pose(g), true)});
    const Coords noisy = g + oracle::random_coords(rng, 17, 3, 50.0);
    for (bool with_scale : {true, false}) {
      const double want = oracle::oracle_pa_mpjpe(noisy, g, with_scale);
      worst_oracle = std::max(worst_oracle, std::abs(pa_joint_error(pose(noisy), pose(g), with_scale) - want));
    }
  }
  return {worst_rigid <= 1e-8 && worst_oracle <= 1e-9,
          fmt("rigid/similarity residual %.3g mm, oracle diff %.3g", worst_rigid, worst_oracle)};
}

Outcome metric_identities() {
  std::mt19937_64 rng(107);
  auto pose = [](const Coords& c) { return Pose{c, {}, std::nullopt}; };
  const Skeleton h = human36m_skeleton();
  double worst_shift = 0.0;
  bool pa_le = true;
  for (int i = 0; i < 100; ++i) {
    const Coords g = oracle::random_coords(rng, 17, 3);
    const Coords p = g + oracle::random_coords(rng, 17, 3, 30.0);
    const Coords shifted = p.rowwise() + Eigen::RowVector3d(oracle::random_coords(rng, 1, 3, 1000.0).row(0));
    worst_shift = std::max(worst_shift, std::abs(bone_error(pose(shifted), pose(g), h).mean -
                                                 bone_error(pose(p), pose(g), h).mean));
    pa_le = pa_le && pa_joint_error(pose(p), pose(g), true) <= joint_error(pose(p), pose(g)).mean &&
            pa_joint_error(pose(p), pose(g), false) <= joint_error(pose(p), pose(g)).mean;
  }
  SynthConfig c = default_synth_config();
  c.num_samples = 600;
  c.seed = 7;
  const double std_synth = bone_std(generate(c).poses, h).mean;
  return {worst_shift <= 1e-9 && std_synth <= 1e-9 && pa_le,
          fmt("translation drift %.3g, synthetic bone std %.3g", worst_shift, std_synth) +
              (pa_le ? ", PA <= joint error" : ", PA > joint error seen")};
}

Outcome cardinalities() {
  std::mt19937_64 rng(108);
  for (int k = 2; k <= 32; ++k) {
    const Skeleton s(oracle::random_topology(rng, k));
    const auto n = static_cast<std::size_t>(k);
    if (build_pair_set(PairSetKind::all, s).size() != n * (n - 1) / 2 || build_pair_set(PairSetKind::joint, s).size() != n ||
        build_pair_set(PairSetKind::bone, s).size() != n || build_pair_set(PairSetKind::both, s).size() != 2 * n - 1) {
      return {false, "mismatch at K=" + std::to_string(k)};
    }
  }
  return {build_pair_set(PairSetKind::both, human36m_skeleton()).size() == 33, "K=2..32 ok, |P_both|=33 for K=17"};
}

Outcome table_trends() {
  const auto t0 = Clock::now();
  const DemoConfig cfg;
  const ComparisonTable table = evaluate_variants(cfg);
  const double t = seconds_since(t0);
  auto idx = [&](Variant v) {
    return static_cast<std::size_t>(std::find(table.variants.begin(), table.variants.end(), v) - table.variants.begin());
  };
  const std::size_t base = idx(Variant::baseline), all = idx(Variant::all), bone = idx(Variant::bone);
  int std_wins = 0, bone_wins = 0;
  std::ostringstream seeds;
  for (std::size_t s = 0; s < table.seeds.size(); ++s) {
    const auto& rb = table.at(base, s).report;
    const auto& ra = table.at(all, s).report;
    const auto& ro = table.at(bone, s).report;
    std_wins += ra.bone_std->mean < rb.bone_std->mean;
    bone_wins += ro.bone_error.mean < rb.bone_error.mean;
    seeds << fmt(" [std %.2f vs %.2f;", ra.bone_std->mean, rb.bone_std->mean)
          << fmt(" bone err %.2f vs %.2f]", ro.bone_error.mean, rb.bone_error.mean);
  }
  const bool pass = table.seeds.size() >= 3 && std_wins >= 2 && bone_wins >= 2 && t < 300.0;
  return {pass, "bone std wins " + std::to_string(std_wins) + "/" + std::to_string(table.seeds.size()) +
                    ", bone error wins " + std::to_string(bone_wins) + "/" + std::to_string(table.seeds.size()) +
                    seeds.str() + fmt(", %.1f s < 300 s", t)};
}

Outcome bone_vs_joint_std() {
  SynthConfig c = default_synth_config();
  c.num_samples = 3000;
  c.seed = 110;
  const auto ds = generate(c);
  const Skeleton s(c.topology);
  const auto js = fit_stats(ds.poses, StatsTarget::joints, s);
  const auto bs = fit_stats(ds.poses, StatsTarget::bones, s);
  int checked = 0;
  double worst_ratio = 0.0;
  for (int k = 1; k <= s.num_joints(); ++k) {
    if (s.depth(k) < 3) continue;
    ++checked;
    worst_ratio = std::max(worst_ratio, bs.std.row(k - 1).norm() / js.std.row(k - 1).norm());
  }
  return {checked > 0 && worst_ratio < 1.0,
          std::to_string(checked) + " joints at depth >= 3, max bone/joint std ratio " + fmt("%.3f", worst_ratio)};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "posekit_acceptance";
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "demo.json");
    cfg << R"({"train_samples": 400, "test_samples": 100, "train": {"epochs": 10, "lr_drop_epochs": [6, 8]}})";
  }
  std::string outputs[2];
  for (int r = 0; r < 2; ++r) {
    const fs::path out = dir / ("run" + std::to_string(r) + ".json");
    const std::string cmd = std::string(POSEKIT_CLI_PATH) + " train-demo --config " + (dir / "demo.json").string() +
                            " --variants all --seeds 3 --out " + out.string() + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "train-demo exited abnormally"};
    std::ifstream in(out, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    outputs[r] = ss.str();
  }
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  return {same, std::to_string(outputs[0].size()) + " bytes, " + (same ? "identical" : "different")};
}

}  // namespace

int main() {
  report(1, "round-trip", round_trip);
  report(2, "composition oracle", composition_oracle);
  report(3, "loss equivalences", loss_equivalences);
  report(4, "gradient check", gradient_check);
  report(5, "mixed-loss contract", mixed_contract);
  report(6, "procrustes", procrustes);
  report(7, "metric identities", metric_identities);
  report(8, "pair-set cardinalities", cardinalities);
  report(9, "comparison table trends", table_trends);
  report(10, "bone vs joint spread", bone_vs_joint_std);
  report(11, "train-demo determinism", determinism);
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
