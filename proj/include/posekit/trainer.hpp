#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "posekit/loss.hpp"
#include "posekit/metrics.hpp"
#include "posekit/pair_set.hpp"
#include "posekit/parallel.hpp"
#include "posekit/representation.hpp"
#include "posekit/synth.hpp"

namespace posekit {

/// Method rows: the baseline regresses joints with the joint loss, the other
/// variants regress bones with the compositional loss over a pair set.
enum class Variant { baseline, joint, bone, both, all };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::baseline: return "baseline";
    case Variant::joint: return "joint";
    case Variant::bone: return "bone";
    case Variant::both: return "both";
    case Variant::all: return "all";
  }
  return "baseline";
}

inline std::string_view display_name(Variant v) {
  switch (v) {
    case Variant::baseline: return "Baseline";
    case Variant::joint: return "Ours (joint)";
    case Variant::bone: return "Ours (bone)";
    case Variant::both: return "Ours (both)";
    case Variant::all: return "Ours (all)";
  }
  return "Baseline";
}

inline Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::baseline, Variant::joint, Variant::bone, Variant::both, Variant::all}) {
    if (name == to_string(v)) return v;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown variant '" + std::string(name) + "'");
}

inline std::vector<Variant> all_variants() {
  return {Variant::baseline, Variant::joint, Variant::bone, Variant::both, Variant::all};
}

inline PairSetKind pair_kind_of(Variant v) {
  switch (v) {
    case Variant::joint: return PairSetKind::joint;
    case Variant::bone: return PairSetKind::bone;
    case Variant::both: return PairSetKind::both;
    case Variant::all: return PairSetKind::all;
    case Variant::baseline: break;
  }
  throw Error(ErrorCode::InvalidConfig, "the baseline does not use a pair set");
}

/// Defaults train the linear map to convergence; the learning rate drops
/// tenfold at 60% and 85% of the epochs.
struct TrainConfig {
  int epochs = 200;
  double lr = 0.03;
  int batch_size = 64;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  /// Compose every mini-batch from equal numbers of 2D and 3D samples.
  bool balanced_2d_3d = false;
  /// Divide each step by the number of L1 terms per sample, so one learning
  /// rate suits every pair set. Off: the step follows the plain summed loss.
  bool per_term_step = true;
  /// Width of the tanh hidden layer; 0 trains a purely linear map.
  int hidden_units = 0;
  /// Epochs after which the learning rate is multiplied by `lr_drop_factor`.
  std::vector<int> lr_drop_epochs = {120, 170};
  double lr_drop_factor = 0.1;
};

inline double learning_rate_at(const TrainConfig& cfg, int epoch) {
  double lr = cfg.lr;
  for (int e : cfg.lr_drop_epochs) {
    if (epoch >= e) lr *= cfg.lr_drop_factor;
  }
  return lr;
}

/// Map from standardized features to 3K normalized outputs (bones, or joints
/// for the baseline). With `hidden` > 0 the map is
/// W2 * tanh(W1 x + b1) + b2, otherwise the linear W2 x + b2.
struct ToyRegressor {
  Eigen::MatrixXd w1;  // H x F, empty when linear
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // 3K x H (or 3K x F)
  Eigen::VectorXd b2;  // 3K
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_std;

  bool has_hidden() const { return w1.size() > 0; }

  Eigen::VectorXd standardize(const Eigen::VectorXd& f) const {
    return ((f - feature_mean).array() / feature_std.array()).matrix();
  }

  /// Output for an already standardized input; `hidden_out` receives the
  /// hidden activations when present.
  Eigen::VectorXd forward(const Eigen::VectorXd& x, Eigen::VectorXd* hidden_out = nullptr) const {
    if (!has_hidden()) return w2 * x + b2;
    Eigen::VectorXd h = (w1 * x + b1).array().tanh().matrix();
    Eigen::VectorXd out = w2 * h + b2;
    if (hidden_out) *hidden_out = std::move(h);
    return out;
  }

  /// K x 3 normalized output.
  Coords predict(const Eigen::VectorXd& features) const {
    const Eigen::VectorXd out = forward(standardize(features));
    return Eigen::Map<const Coords>(out.data(), out.size() / 3, 3);
  }

  bool finite() const { return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite(); }
};

/// Counters that let tests assert which code paths a run touched.
struct TrainDiagnostics {
  std::size_t compositional_evaluations = 0;
  std::size_t joint_loss_evaluations = 0;
  /// Largest |dL/dz| produced by any 2D sample; 0 under the mixed-loss contract.
  double max_abs_z_grad_from_2d = 0.0;
  std::size_t samples_2d_seen = 0;
};

/// Normalization constants fitted on the training split.
struct FittedStats {
  NormStats joints;
  NormStats bones;
  std::optional<PairSet> pairs;
  std::optional<NormStats> deltas;
};

struct TrainResult {
  ToyRegressor model;
  FittedStats stats;
  /// Mean per-sample training loss before training (entry 0) and after each epoch.
  std::vector<double> loss_curve;
  TrainDiagnostics diagnostics;
};

inline FittedStats fit_training_stats(const SynthDataset& data, const Skeleton& skel, Variant variant) {
  StatsOptions opts;
  opts.allow_mixed_dims = true;
  FittedStats s;
  s.joints = fit_stats(data.poses, StatsTarget::joints, skel, nullptr, opts);
  s.bones = fit_stats(data.poses, StatsTarget::bones, skel, nullptr, opts);
  if (variant != Variant::baseline) {
    s.pairs = build_pair_set(pair_kind_of(variant), skel);
    s.deltas = fit_stats(data.poses, *s.pairs, skel, opts);
  }
  for (NormStats* st : {&s.joints, &s.bones}) {
    if (st->cols() != 3) throw Error(ErrorCode::InsufficientData, "training data needs at least two 3D samples");
  }
  return s;
}

namespace detail {

inline LossResult variant_loss(Variant variant, const Coords& out, const Pose& gt, const Skeleton& skel,
                               const FittedStats& stats, TrainDiagnostics& diag) {
  if (variant == Variant::baseline) {
    ++diag.joint_loss_evaluations;
    return mixed_joint_loss(out, gt, stats.joints);
  }
  ++diag.compositional_evaluations;
  return mixed_loss(out, gt, skel, *stats.pairs, stats.bones, *stats.deltas);
}

inline std::size_t terms_per_sample(Variant variant, const Skeleton& skel, const FittedStats& stats) {
  const std::size_t rows = variant == Variant::baseline ? static_cast<std::size_t>(skel.num_joints()) : stats.pairs->size();
  return rows * 3;
}

inline std::vector<std::vector<std::size_t>> make_batches(const SynthDataset& data, const TrainConfig& cfg,
                                                          std::mt19937_64& rng) {
  std::vector<std::size_t> order(data.poses.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  std::vector<std::vector<std::size_t>> batches;
  if (cfg.balanced_2d_3d) {
    std::vector<std::size_t> two, three;
    for (std::size_t i : order) (data.poses[i].dims() == 2 ? two : three).push_back(i);
    const std::size_t half = std::max<std::size_t>(1, batch / 2);
    std::size_t a = 0, b = 0;
    while (a < two.size() || b < three.size()) {
      std::vector<std::size_t> cur;
      for (std::size_t j = 0; j < half && a < two.size(); ++j) cur.push_back(two[a++]);
      for (std::size_t j = 0; j < half && b < three.size(); ++j) cur.push_back(three[b++]);
      batches.push_back(std::move(cur));
    }
    return batches;
  }
  for (std::size_t start = 0; start < order.size(); start += batch) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + batch)));
  }
  return batches;
}

}  // namespace detail

/// Mean per-sample loss of `model` on `data` under the variant's loss.
inline double dataset_loss(const ToyRegressor& model, const SynthDataset& data, const Skeleton& skel,
                           Variant variant, const FittedStats& stats, TrainDiagnostics& diag) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.poses.size(); ++i) {
    total += detail::variant_loss(variant, model.predict(data.features[i]), data.poses[i], skel, stats, diag).value;
  }
  return data.poses.empty() ? 0.0 : total / static_cast<double>(data.poses.size());
}

/// Mini-batch SGD with momentum on the variant's loss. Each step uses the
/// summed per-sample gradients scaled by lr / (batch size x L1 terms per
/// sample), so one learning rate suits every pair set.
inline TrainResult train(const SynthDataset& data, const Skeleton& skel, Variant variant, const TrainConfig& cfg) {
  if (data.poses.empty() || data.features.size() != data.poses.size()) {
    throw Error(ErrorCode::InsufficientData, "training set is empty or features are missing");
  }
  if (cfg.batch_size <= 0 || cfg.epochs < 0 || !(cfg.lr >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "batch_size > 0, epochs >= 0 and lr >= 0 are required");
  }
  TrainResult res;
  res.stats = fit_training_stats(data, skel, variant);

  const auto f_dim = data.features.front().size();
  const auto out_dim = static_cast<Eigen::Index>(3 * skel.num_joints());
  ToyRegressor& model = res.model;
  model.feature_mean = Eigen::VectorXd::Zero(f_dim);
  for (const auto& f : data.features) model.feature_mean += f;
  model.feature_mean /= static_cast<double>(data.features.size());
  model.feature_std = Eigen::VectorXd::Zero(f_dim);
  for (const auto& f : data.features) model.feature_std.array() += (f - model.feature_mean).array().square();
  model.feature_std = (model.feature_std / static_cast<double>(data.features.size())).cwiseSqrt().cwiseMax(kDefaultStdFloor);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_matrix = [&](Eigen::Index rows, Eigen::Index cols, double scale) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scale * gauss(rng);
    }
    return m;
  };
  const auto hidden = static_cast<Eigen::Index>(cfg.hidden_units);
  if (hidden > 0) {
    model.w1 = random_matrix(hidden, f_dim, 1.0 / std::sqrt(static_cast<double>(f_dim)));
    model.b1 = Eigen::VectorXd::Zero(hidden);
    model.w2 = random_matrix(out_dim, hidden, 0.01);
  } else {
    model.w2 = random_matrix(out_dim, f_dim, 0.01);
  }
  model.b2 = Eigen::VectorXd::Zero(out_dim);

  std::vector<Eigen::VectorXd> inputs;
  inputs.reserve(data.features.size());
  for (const auto& f : data.features) inputs.push_back(model.standardize(f));

  TrainDiagnostics& diag = res.diagnostics;
  const double initial = dataset_loss(model, data, skel, variant, res.stats, diag);
  res.loss_curve.push_back(initial);

  ToyRegressor velocity;
  velocity.w1 = Eigen::MatrixXd::Zero(model.w1.rows(), model.w1.cols());
  velocity.b1 = Eigen::VectorXd::Zero(model.b1.size());
  velocity.w2 = Eigen::MatrixXd::Zero(model.w2.rows(), model.w2.cols());
  velocity.b2 = Eigen::VectorXd::Zero(model.b2.size());
  ToyRegressor grad = velocity;
  const double per_term =
      cfg.per_term_step ? 1.0 / static_cast<double>(detail::terms_per_sample(variant, skel, res.stats)) : 1.0;

  Eigen::VectorXd h;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double epoch_lr = learning_rate_at(cfg, epoch);
    for (const auto& batch : detail::make_batches(data, cfg, rng)) {
      grad.w1.setZero();
      grad.b1.setZero();
      grad.w2.setZero();
      grad.b2.setZero();
      for (std::size_t i : batch) {
        const Eigen::VectorXd out = model.forward(inputs[i], &h);
        const Coords pred = Eigen::Map<const Coords>(out.data(), out_dim / 3, 3);
        const LossResult lr = detail::variant_loss(variant, pred, data.poses[i], skel, res.stats, diag);
        if (data.poses[i].dims() == 2) {
          ++diag.samples_2d_seen;
          diag.max_abs_z_grad_from_2d = std::max(diag.max_abs_z_grad_from_2d, lr.grad.col(2).cwiseAbs().maxCoeff());
        }
        const Eigen::Map<const Eigen::VectorXd> g(lr.grad.data(), out_dim);
        grad.b2 += g;
        if (model.has_hidden()) {
          grad.w2.noalias() += g * h.transpose();
          const Eigen::VectorXd dz = ((model.w2.transpose() * g).array() * (1.0 - h.array().square())).matrix();
          grad.w1.noalias() += dz * inputs[i].transpose();
          grad.b1 += dz;
        } else {
          grad.w2.noalias() += g * inputs[i].transpose();
        }
      }
      if (epoch_lr == 0.0) continue;
      const double step = epoch_lr * per_term / static_cast<double>(batch.size());
      velocity.w1 = cfg.momentum * velocity.w1 - step * (grad.w1 + cfg.weight_decay * model.w1);
      velocity.b1 = cfg.momentum * velocity.b1 - step * grad.b1;
      velocity.w2 = cfg.momentum * velocity.w2 - step * (grad.w2 + cfg.weight_decay * model.w2);
      velocity.b2 = cfg.momentum * velocity.b2 - step * grad.b2;
      model.w1 += velocity.w1;
      model.b1 += velocity.b1;
      model.w2 += velocity.w2;
      model.b2 += velocity.b2;
    }
    const double loss = dataset_loss(model, data, skel, variant, res.stats, diag);
    if (!std::isfinite(loss) || loss > 1e6 * std::max(initial, 1e-12) || !model.finite()) {
      throw Error(ErrorCode::DivergenceDetected, "training diverged at epoch " + std::to_string(epoch + 1));
    }
    res.loss_curve.push_back(loss);
  }
  return res;
}

/// Native-unit joint predictions of a trained model.
inline Pose predict_pose(const TrainResult& trained, const Eigen::VectorXd& features, const Skeleton& skel,
                         Variant variant, const SampleMeta& meta) {
  const Coords out = trained.model.predict(features);
  Pose p;
  p.meta = meta;
  if (variant == Variant::baseline) {
    p.joints = unnormalize(out, trained.stats.joints);
  } else {
    p.joints = bones_to_joints(unnormalize(out, trained.stats.bones), skel);
  }
  return p;
}

struct DemoConfig {
  SynthConfig synth = default_synth_config();
  int train_samples = 2000;
  int test_samples = 500;
  TrainConfig train;
  std::vector<Variant> variants = all_variants();
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  EvalOptions eval;
};

struct VariantRun {
  Variant variant = Variant::baseline;
  std::uint64_t seed = 0;
  MetricsReport report;
  std::vector<double> loss_curve;
};

struct ComparisonTable {
  std::vector<Variant> variants;
  std::vector<std::uint64_t> seeds;
  /// runs[v * seeds.size() + s]
  std::vector<VariantRun> runs;

  const VariantRun& at(std::size_t v, std::size_t s) const { return runs[v * seeds.size() + s]; }
};

/// Train/test split for one seed; both splits derive from (synth.seed, seed).
inline std::pair<SynthDataset, SynthDataset> demo_splits(const DemoConfig& cfg, std::uint64_t seed) {
  SynthConfig train_cfg = cfg.synth;
  train_cfg.num_samples = cfg.train_samples;
  train_cfg.seed = cfg.synth.seed * 1000003ULL + 2 * seed + 1;
  SynthConfig test_cfg = cfg.synth;
  test_cfg.num_samples = cfg.test_samples;
  test_cfg.fraction_2d = 0.0;
  test_cfg.seed = cfg.synth.seed * 1000003ULL + 2 * seed + 2;
  return {generate(train_cfg), generate(test_cfg)};
}

/// Trains every (variant, seed) and evaluates it on the held-out 3D split.
inline ComparisonTable evaluate_variants(const DemoConfig& cfg) {
  const Skeleton skel(cfg.synth.topology);
  ComparisonTable table;
  table.variants = cfg.variants;
  table.seeds = cfg.seeds;
  table.runs.resize(cfg.variants.size() * cfg.seeds.size());

  std::vector<std::pair<SynthDataset, SynthDataset>> splits(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), [&](std::size_t s) { splits[s] = demo_splits(cfg, cfg.seeds[s]); });

  parallel_for(table.runs.size(), [&](std::size_t idx) {
    const std::size_t v = idx / cfg.seeds.size();
    const std::size_t s = idx % cfg.seeds.size();
    const auto& [train_set, test_set] = splits[s];
    TrainConfig tc = cfg.train;
    tc.seed = cfg.train.seed * 1000003ULL + cfg.seeds[s];
    const TrainResult trained = train(train_set, skel, cfg.variants[v], tc);
    std::vector<Pose> preds;
    preds.reserve(test_set.poses.size());
    for (std::size_t i = 0; i < test_set.poses.size(); ++i) {
      preds.push_back(predict_pose(trained, test_set.features[i], skel, cfg.variants[v], test_set.poses[i].meta));
    }
    VariantRun& run = table.runs[idx];
    run.variant = cfg.variants[v];
    run.seed = cfg.seeds[s];
    run.report = evaluate(preds, test_set.poses, skel, cfg.eval);
    run.loss_curve = trained.loss_curve;
  });
  return table;
}

}  // namespace posekit
