// Builds a pose, perturbs one forearm, and compares the joint loss with the
// all-pairs compositional loss on the built-in skeleton.

#include <iostream>
#include <vector>

#include "posekit/posekit.hpp"

int main() {
  using namespace posekit;
  const Skeleton skel = human36m_skeleton();

  SynthConfig cfg = default_synth_config();
  cfg.num_samples = 200;
  cfg.seed = 7;
  const SynthDataset data = generate(cfg);

  const NormStats joint_stats = fit_stats(data.poses, StatsTarget::joints, skel);
  const NormStats bone_stats = fit_stats(data.poses, StatsTarget::bones, skel);
  const PairSet all_pairs = build_pair_set(PairSetKind::all, skel);
  const NormStats delta_stats = fit_stats(data.poses, all_pairs, skel);

  const Pose& gt = data.poses.front();
  Pose pred = gt;
  pred.joints.row(skel.find_joint("l_wrist") - 1).array() += 40.0;

  const LossResult joints = joint_loss(normalize(pred.joints, joint_stats), gt, joint_stats);
  const Coords bones_n = normalize(joints_to_bones(pred.joints, skel).bones, bone_stats);
  const LossResult composed = compositional_loss(bones_n, gt, skel, all_pairs, bone_stats, delta_stats);

  std::cout << "joint loss          " << joints.value << '\n'
            << "compositional (all) " << composed.value << " over " << all_pairs.size() << " pairs\n"
            << "joint error (mm)    " << joint_error(pred, gt).mean << '\n'
            << "bone error (mm)     " << bone_error(pred, gt, skel).mean << '\n';
}
