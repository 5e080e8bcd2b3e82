// posekit command-line tool: statistics fitting, loss evaluation, metrics,
// synthetic data, the variant comparison demo, bone composition and
// back-projection. Exit codes: 1 usage, 2 malformed or inconsistent input,
// 3 internal failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "posekit/posekit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace posekit;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::DivergenceDetected:
    case ErrorCode::KinkProximity:
      return kExitInternal;
    default:
      return kExitInput;
  }
}

Skeleton load_skeleton(const std::string& path) {
  if (path.empty()) return human36m_skeleton();
  return Skeleton(io::topology_from_json(io::read_json(path)));
}

void emit(const json& j, bool pretty) { std::cout << (pretty ? j.dump(2) : j.dump()) << '\n'; }

void require_pairing(const std::vector<Pose>& preds, const std::vector<Pose>& gts) {
  if (preds.size() != gts.size()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction file has " + std::to_string(preds.size()) +
                                              " records, ground truth " + std::to_string(gts.size()));
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!preds[i].meta.id.empty() && !gts[i].meta.id.empty() && preds[i].meta.id != gts[i].meta.id) {
      throw Error(ErrorCode::ShapeMismatch, "record " + std::to_string(i + 1) + ": prediction id '" +
                                                preds[i].meta.id + "' does not match ground truth '" +
                                                gts[i].meta.id + "'");
    }
  }
}

// Output paths must point into an existing directory.
std::string output_path_check(const std::string& p) {
  const fs::path parent = fs::path(p).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) return "directory of " + p + " does not exist";
  return {};
}

struct LossArgs {
  std::string pred, gt, variant, skeleton, config, reduction = "sum";
  std::vector<std::string> stats;
};

const NormStats& pick_stats(const std::vector<NormStats>& all, StatsTarget target,
                            const std::optional<PairSet>& ps) {
  for (const auto& s : all) {
    if (s.target != target) continue;
    if (target == StatsTarget::pair_deltas && s.pairs != ps->pairs) continue;
    return s;
  }
  std::string what = std::string(to_string(target));
  if (ps) what += " (" + std::string(to_string(ps->kind)) + ")";
  throw Error(ErrorCode::StatsMismatch, "no " + what + " statistics among --stats files");
}

json run_loss(const LossArgs& a) {
  LossArgs args = a;
  if (!args.config.empty()) {
    const json cfg = io::read_json(args.config);
    if (args.variant.empty()) args.variant = cfg.value("variant", std::string{});
    if (args.skeleton.empty()) args.skeleton = cfg.value("skeleton", std::string{});
    if (args.stats.empty() && cfg.contains("stats")) {
      const auto& s = cfg.at("stats");
      args.stats = s.is_array() ? s.get<std::vector<std::string>>() : std::vector<std::string>{s.get<std::string>()};
    }
  }
  if (args.variant.empty()) throw Error(ErrorCode::InvalidConfig, "--variant is required");
  const Variant variant = parse_variant(args.variant);
  const Skeleton skel = load_skeleton(args.skeleton);
  std::vector<NormStats> stats;
  for (const auto& p : args.stats) stats.push_back(io::stats_from_json(io::read_json(p)));
  const auto preds = io::read_poses(args.pred);
  const auto gts = io::read_poses(args.gt);
  require_pairing(preds, gts);

  std::optional<PairSet> ps;
  if (variant != Variant::baseline) ps = build_pair_set(pair_kind_of(variant), skel);

  json samples = json::array();
  double total = 0.0;
  std::size_t terms = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Pose& pred = preds[i];
    const Pose& gt = gts[i];
    const bool mixed = pred.dims() == 3 && gt.dims() == 2;
    if (pred.dims() != gt.dims() && !mixed) {
      throw Error(ErrorCode::MixedDims, "record " + std::to_string(i + 1) + ": prediction and ground truth dims differ");
    }
    LossResult res;
    json term_json = json::array();
    if (variant == Variant::baseline) {
      const NormStats& js = pick_stats(stats, StatsTarget::joints, std::nullopt);
      const Coords pred_n = normalize(pred.joints, js);
      res = mixed ? mixed_joint_loss(pred_n, gt, js) : joint_loss(pred_n, gt, js);
      for (std::size_t k = 0; k < res.terms.size(); ++k) {
        term_json.push_back({{"joint", skel.joint_name(static_cast<int>(k) + 1)}, {"value", res.terms[k]}});
      }
    } else {
      const NormStats& bs = pick_stats(stats, StatsTarget::bones, std::nullopt);
      const NormStats& ds = pick_stats(stats, StatsTarget::pair_deltas, ps);
      const Coords bones_n = normalize(joints_to_bones(pred.joints, skel).bones, bs);
      res = mixed ? mixed_loss(bones_n, gt, skel, *ps, bs, ds) : compositional_loss(bones_n, gt, skel, *ps, bs, ds);
      for (std::size_t t = 0; t < res.terms.size(); ++t) {
        term_json.push_back({{"u", ps->pairs[t].u}, {"v", ps->pairs[t].v}, {"value", res.terms[t]}});
      }
    }
    const double value = args.reduction == "mean" ? res.mean_per_term() : res.value;
    total += res.value;
    terms += res.terms.size();
    samples.push_back({{"id", gt.meta.id}, {"loss", value}, {"terms", std::move(term_json)}});
  }
  const double reported = args.reduction == "mean" ? (terms ? total / static_cast<double>(terms) : 0.0) : total;
  return json{{"variant", std::string(to_string(variant))},
              {"reduction", args.reduction},
              {"total", reported},
              {"samples", std::move(samples)}};
}

json run_eval(const std::string& pred_path, const std::string& gt_path, const std::string& skel_path,
              const std::string& limits_path, const std::string& pa_scale) {
  const Skeleton skel = load_skeleton(skel_path);
  const auto preds = io::read_poses(pred_path);
  const auto gts = io::read_poses(gt_path);
  require_pairing(preds, gts);
  EvalOptions opts;
  opts.pa_with_scale = pa_scale == "on";
  if (!limits_path.empty()) opts.angle_limits = io::angle_limits_from_json(io::read_json(limits_path), skel);
  return io::to_json(evaluate(preds, gts, skel, opts), skel);
}

std::vector<Pose> run_backproject(const std::string& pred2d_path, const std::string& depth_path) {
  const auto poses = io::read_poses(pred2d_path);
  struct DepthRecord {
    std::string id;
    std::vector<double> depths;
  };
  const auto depths = io::read_records<DepthRecord>(depth_path, [](const json& j) {
    return DepthRecord{j.value("id", std::string{}), j.at("depths").get<std::vector<double>>()};
  });
  if (depths.size() != poses.size()) {
    throw Error(ErrorCode::ShapeMismatch, "2D pose and depth files differ in record count");
  }
  std::vector<Pose> out;
  out.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Pose& p = poses[i];
    const std::string where = pred2d_path + ":" + std::to_string(i + 1) + ": ";
    if (p.dims() != 2) throw Error(ErrorCode::ShapeMismatch, where + "expected a 2D pose");
    if (!p.camera) throw Error(ErrorCode::InvalidIntrinsics, where + "record has no camera intrinsics");
    if (!depths[i].id.empty() && !p.meta.id.empty() && depths[i].id != p.meta.id) {
      throw Error(ErrorCode::ShapeMismatch, where + "depth record id '" + depths[i].id + "' does not match");
    }
    Pose q;
    q.meta = p.meta;
    q.joints = backproject_pose(p.joints, depths[i].depths, *p.camera);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Variant> parse_variant_list(const std::string& list) {
  if (list == "all") return all_variants();
  std::vector<Variant> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_variant(item));
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "no variants selected");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posekit: compositional pose regression losses, metrics and demo"};
  app.require_subcommand(1, 1);
  bool pretty = false;
  app.add_flag("--pretty", pretty, "Indent JSON written to stdout");

  const auto out_dir_ok = CLI::Validator(output_path_check, "OUTPUT");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Fit normalization statistics on ground truth");
  std::string st_gt, st_target = "joints", st_pairs = "all", st_skel, st_out;
  double st_floor = kDefaultStdFloor;
  bool st_pooled = false, st_mixed = false;
  stats_cmd->add_option("--gt", st_gt, "Ground-truth poses (JSONL)")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--target", st_target, "joints | bones | pairs")
      ->check(CLI::IsMember({"joints", "bones", "pairs"}));
  stats_cmd->add_option("--pairs", st_pairs, "Pair set for --target pairs")
      ->check(CLI::IsMember({"joint", "bone", "both", "all"}));
  stats_cmd->add_option("--skeleton", st_skel, "Skeleton JSON (default: built-in 17 joints)")->check(CLI::ExistingFile);
  stats_cmd->add_option("--out", st_out, "Output statistics JSON")->required()->check(out_dir_ok);
  stats_cmd->add_option("--std-floor", st_floor, "Lower bound on every std");
  stats_cmd->add_flag("--pooled", st_pooled, "Share one per-coordinate std across all pairs");
  stats_cmd->add_flag("--mixed", st_mixed, "Accept mixed 2D/3D ground truth (z from 3D samples)");

  // loss
  auto* loss_cmd = app.add_subcommand("loss", "Evaluate a loss variant on predictions");
  LossArgs loss_args;
  loss_cmd->add_option("--pred", loss_args.pred, "Predicted poses (JSONL)")->required()->check(CLI::ExistingFile);
  loss_cmd->add_option("--gt", loss_args.gt, "Ground-truth poses (JSONL)")->required()->check(CLI::ExistingFile);
  loss_cmd->add_option("--variant", loss_args.variant, "baseline | joint | bone | both | all")
      ->check(CLI::IsMember({"baseline", "joint", "bone", "both", "all"}));
  loss_cmd->add_option("--stats", loss_args.stats, "Statistics files (repeatable)")->check(CLI::ExistingFile);
  loss_cmd->add_option("--skeleton", loss_args.skeleton, "Skeleton JSON")->check(CLI::ExistingFile);
  loss_cmd->add_option("--config", loss_args.config, "Loss config JSON {variant, stats, skeleton}")
      ->check(CLI::ExistingFile);
  loss_cmd->add_option("--reduction", loss_args.reduction, "sum (default) or mean per term, reporting only")
      ->check(CLI::IsMember({"sum", "mean"}));

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Compute the evaluation metrics");
  std::string ev_pred, ev_gt, ev_skel, ev_limits, ev_scale = "on", ev_out;
  eval_cmd->add_option("--pred", ev_pred, "Predicted poses (JSONL)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gt", ev_gt, "Ground-truth poses (JSONL)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--skeleton", ev_skel, "Skeleton JSON")->check(CLI::ExistingFile);
  eval_cmd->add_option("--angle-limits", ev_limits, "Angle limits JSON {joint: [lo, hi]}")->check(CLI::ExistingFile);
  eval_cmd->add_option("--pa-scale", ev_scale, "Procrustes with uniform scale")->check(CLI::IsMember({"on", "off"}));
  eval_cmd->add_option("--out", ev_out, "Also write the report to this file")->check(out_dir_ok);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic pose dataset");
  std::string sy_config, sy_out, sy_features;
  synth_cmd->add_option("--config", sy_config, "Synthetic config JSON")->required()->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", sy_out, "Output poses (JSONL)")->required()->check(out_dir_ok);
  synth_cmd->add_option("--features", sy_features, "Optional feature vectors (JSONL)")->check(out_dir_ok);

  // train-demo
  auto* demo_cmd = app.add_subcommand("train-demo", "Train and compare loss variants on synthetic data");
  std::string dm_config, dm_variants = "all", dm_out;
  int dm_seeds = 0;
  bool dm_text = false;
  demo_cmd->add_option("--config", dm_config, "Demo config JSON (defaults when omitted)")->check(CLI::ExistingFile);
  demo_cmd->add_option("--variants", dm_variants, "'all' or a comma list");
  demo_cmd->add_option("--seeds", dm_seeds, "Use seeds 1..N (overrides the config)")->check(CLI::PositiveNumber);
  demo_cmd->add_option("--out", dm_out, "Output comparison JSON")->required()->check(out_dir_ok);
  demo_cmd->add_flag("--text", dm_text, "Print the aligned table to stderr");

  // compose
  auto* compose_cmd = app.add_subcommand("compose", "Turn bone records into joint positions");
  std::string cp_bones, cp_skel, cp_out;
  compose_cmd->add_option("--bones", cp_bones, "Bone poses (JSONL with 'bones')")->required()->check(CLI::ExistingFile);
  compose_cmd->add_option("--skeleton", cp_skel, "Skeleton JSON")->check(CLI::ExistingFile);
  compose_cmd->add_option("--out", cp_out, "Output joints (JSONL)")->required()->check(out_dir_ok);

  // backproject
  auto* bp_cmd = app.add_subcommand("backproject", "Lift pixel poses to camera space with depths");
  std::string bp_pred, bp_depths, bp_out;
  bp_cmd->add_option("--pred2d", bp_pred, "2D poses with camera (JSONL)")->required()->check(CLI::ExistingFile);
  bp_cmd->add_option("--depths", bp_depths, "Per-joint depths (JSONL {id, depths})")->required()->check(CLI::ExistingFile);
  bp_cmd->add_option("--out", bp_out, "Output 3D poses (JSONL)")->required()->check(out_dir_ok);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (stats_cmd->parsed()) {
      const Skeleton skel = load_skeleton(st_skel);
      const auto gts = io::read_poses(st_gt);
      StatsOptions opts;
      opts.std_floor = st_floor;
      opts.pooled_pairs = st_pooled;
      opts.allow_mixed_dims = st_mixed;
      const StatsTarget target = parse_stats_target(st_target);
      NormStats s;
      if (target == StatsTarget::pair_deltas) {
        const PairSet ps = build_pair_set(parse_pair_set_kind(st_pairs), skel);
        s = fit_stats(gts, ps, skel, opts);
      } else {
        s = fit_stats(gts, target, skel, nullptr, opts);
      }
      io::write_json(st_out, io::to_json(s));
    } else if (loss_cmd->parsed()) {
      emit(run_loss(loss_args), pretty);
    } else if (eval_cmd->parsed()) {
      const json report = run_eval(ev_pred, ev_gt, ev_skel, ev_limits, ev_scale);
      if (!ev_out.empty()) io::write_json(ev_out, report);
      emit(report, pretty);
    } else if (synth_cmd->parsed()) {
      const SynthConfig cfg = io::synth_config_from_json(io::read_json(sy_config));
      const SynthDataset ds = generate(cfg);
      io::write_poses(sy_out, ds.poses);
      if (!sy_features.empty()) {
        std::vector<json> recs;
        for (std::size_t i = 0; i < ds.poses.size(); ++i) {
          recs.push_back({{"id", ds.poses[i].meta.id},
                          {"features", std::vector<double>(ds.features[i].data(),
                                                           ds.features[i].data() + ds.features[i].size())}});
        }
        io::write_jsonl(sy_features, recs);
      }
    } else if (demo_cmd->parsed()) {
      DemoConfig cfg = dm_config.empty() ? DemoConfig{} : io::demo_config_from_json(io::read_json(dm_config));
      if (demo_cmd->count("--variants") > 0 || dm_config.empty()) cfg.variants = parse_variant_list(dm_variants);
      if (dm_seeds > 0) {
        cfg.seeds.clear();
        for (int s = 1; s <= dm_seeds; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
      }
      const Skeleton skel(cfg.synth.topology);
      const ComparisonTable table = evaluate_variants(cfg);
      json out = io::to_json(table, skel);
      out["config"] = io::to_json(cfg);
      io::write_json(dm_out, out);
      if (dm_text) std::cerr << io::to_text(table);
    } else if (compose_cmd->parsed()) {
      const Skeleton skel = load_skeleton(cp_skel);
      const auto records = io::read_poses(cp_bones, "bones");
      std::vector<Pose> out;
      out.reserve(records.size());
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].num_joints() != skel.num_joints()) {
          throw Error(ErrorCode::MalformedInput,
                      cp_bones + ":" + std::to_string(i + 1) + ": bone count does not match the skeleton");
        }
        Pose p = bones_to_joints(BonePose{records[i].joints}, skel);
        p.meta = records[i].meta;
        p.camera = records[i].camera;
        out.push_back(std::move(p));
      }
      io::write_poses(cp_out, out);
    } else if (bp_cmd->parsed()) {
      io::write_poses(bp_out, run_backproject(bp_pred, bp_depths));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
