#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "posekit/metrics.hpp"
#include "posekit/representation.hpp"
#include "posekit/skeleton.hpp"
#include "posekit/synth.hpp"
#include "posekit/trainer.hpp"
#include "posekit/types.hpp"

namespace posekit::io {

using nlohmann::json;

inline Error malformed(const std::string& where, const std::string& what) {
  return Error(ErrorCode::MalformedInput, where + ": " + what);
}

inline json coords_to_json(const Coords& c) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < c.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index d = 0; d < c.cols(); ++d) row.push_back(c(r, d));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Rows of equal width; `expected_cols` of 0 accepts any width.
inline Coords coords_from_json(const json& j, Eigen::Index expected_cols = 0) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::MalformedInput, "expected a non-empty array of rows");
  const auto cols = static_cast<Eigen::Index>(j.front().is_array() ? j.front().size() : 0);
  if (cols == 0 || (expected_cols != 0 && cols != expected_cols)) {
    throw Error(ErrorCode::MalformedInput, "rows must have " +
                                               (expected_cols ? std::to_string(expected_cols) : std::string("> 0")) +
                                               " entries");
  }
  Coords c(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::MalformedInput, "row " + std::to_string(r) + " has the wrong width");
    }
    for (Eigen::Index d = 0; d < cols; ++d) {
      if (!row[static_cast<std::size_t>(d)].is_number()) {
        throw Error(ErrorCode::MalformedInput, "row " + std::to_string(r) + " holds a non-number");
      }
      c(static_cast<Eigen::Index>(r), d) = row[static_cast<std::size_t>(d)].get<double>();
    }
  }
  if (!c.allFinite()) throw Error(ErrorCode::MalformedInput, "non-finite coordinate");
  return c;
}

// -- skeleton ---------------------------------------------------------------

inline json to_json(const SkeletonTopology& t) {
  return json{{"num_joints", t.num_joints},
              {"parent", t.parent},
              {"joint_names", t.joint_names},
              {"limb_joints", t.limb_joints}};
}

inline SkeletonTopology topology_from_json(const json& j) {
  try {
    SkeletonTopology t;
    t.num_joints = j.at("num_joints").get<int>();
    t.parent = j.at("parent").get<std::vector<int>>();
    t.joint_names = j.value("joint_names", std::vector<std::string>{});
    t.limb_joints = j.value("limb_joints", std::vector<int>{});
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("skeleton: ") + e.what());
  }
}

// -- poses ------------------------------------------------------------------

inline json to_json(const Pose& p) {
  json j{{"id", p.meta.id}, {"subject", p.meta.subject}, {"dims", p.dims()}, {"joints", coords_to_json(p.joints)}};
  if (p.camera) j["camera"] = json{{"fx", p.camera->fx}, {"fy", p.camera->fy}, {"cx", p.camera->cx}, {"cy", p.camera->cy}};
  return j;
}

inline SampleMeta meta_from_json(const json& j) {
  SampleMeta m;
  m.id = j.value("id", std::string{});
  m.subject = j.value("subject", std::string{});
  return m;
}

/// Parses one pose record. `key` selects the coordinate array ("joints" or
/// "bones"); the dims tag must agree with the row width.
inline Pose pose_from_json(const json& j, const std::string& key = "joints") {
  if (!j.is_object()) throw Error(ErrorCode::MalformedInput, "record is not a JSON object");
  if (!j.contains(key)) throw Error(ErrorCode::MalformedInput, "missing '" + key + "'");
  Pose p;
  p.meta = meta_from_json(j);
  const int dims = j.contains("dims") ? j.at("dims").get<int>() : 0;
  if (dims != 0 && dims != 2 && dims != 3) throw Error(ErrorCode::MalformedInput, "dims must be 2 or 3");
  p.joints = coords_from_json(j.at(key), dims);
  if (p.dims() != 2 && p.dims() != 3) throw Error(ErrorCode::MalformedInput, "coordinates must be 2D or 3D");
  if (j.contains("camera")) {
    const auto& c = j.at("camera");
    p.camera = CameraIntrinsics{c.at("fx").get<double>(), c.at("fy").get<double>(), c.at("cx").get<double>(),
                                c.at("cy").get<double>()};
  }
  return p;
}

/// Reads a JSON Lines file; errors name the 1-based line.
inline std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw malformed(path, "cannot open file");
  std::vector<json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw malformed(path + ":" + std::to_string(line_no), std::string("invalid JSON (") + e.what() + ")");
    }
  }
  return out;
}

template <typename T>
std::vector<T> read_records(const std::string& path, const std::function<T(const json&)>& parse) {
  std::ifstream in(path);
  if (!in) throw malformed(path, "cannot open file");
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::exception& e) {
      throw malformed(where, e.what());
    } catch (const Error& e) {
      throw malformed(where, e.what());
    }
  }
  return out;
}

inline std::vector<Pose> read_poses(const std::string& path, const std::string& key = "joints") {
  return read_records<Pose>(path, [&key](const json& j) { return pose_from_json(j, key); });
}

inline void write_jsonl(const std::string& path, const std::vector<json>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path);
  for (const auto& r : records) out << r.dump() << '\n';
}

inline void write_poses(const std::string& path, const std::vector<Pose>& poses) {
  std::vector<json> records;
  records.reserve(poses.size());
  for (const auto& p : poses) records.push_back(to_json(p));
  write_jsonl(path, records);
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw malformed(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw malformed(path, std::string("invalid JSON (") + e.what() + ")");
  }
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path);
  out << j.dump(2) << '\n';
}

// -- normalization stats ----------------------------------------------------

inline json to_json(const NormStats& s) {
  json j{{"target", std::string(to_string(s.target))},
         {"count", s.count},
         {"std_floor", s.std_floor},
         {"convention", "population"},
         {"pooled", s.pooled},
         {"mean", coords_to_json(s.mean)},
         {"std", coords_to_json(s.std)}};
  if (s.target == StatsTarget::pair_deltas) {
    j["pair_kind"] = std::string(to_string(s.pair_kind));
    json pairs = json::array();
    for (const auto& p : s.pairs) pairs.push_back({p.u, p.v});
    j["pairs"] = std::move(pairs);
  }
  return j;
}

inline NormStats stats_from_json(const json& j) {
  try {
    NormStats s;
    s.target = parse_stats_target(j.at("target").get<std::string>());
    s.count = j.value("count", std::size_t{0});
    s.std_floor = j.value("std_floor", kDefaultStdFloor);
    s.pooled = j.value("pooled", false);
    s.mean = coords_from_json(j.at("mean"));
    s.std = coords_from_json(j.at("std"), s.mean.cols());
    if (s.std.rows() != s.mean.rows()) throw Error(ErrorCode::MalformedInput, "mean/std shapes differ");
    if ((s.std.array() <= 0.0).any()) throw Error(ErrorCode::MalformedInput, "std must be positive");
    if (s.target == StatsTarget::pair_deltas) {
      s.pair_kind = parse_pair_set_kind(j.value("pair_kind", std::string("custom")));
      for (const auto& p : j.at("pairs")) s.pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
      if (static_cast<Eigen::Index>(s.pairs.size()) != s.mean.rows()) {
        throw Error(ErrorCode::MalformedInput, "pair list does not match the stats rows");
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("stats: ") + e.what());
  }
}

// -- angle limits and metrics ----------------------------------------------

inline AngleLimits angle_limits_from_json(const json& j, const Skeleton& skel) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedInput, "angle limits must be an object");
  AngleLimits limits;
  for (const auto& [name, range] : j.items()) {
    const int k = skel.find_joint(name);
    if (k == 0) throw Error(ErrorCode::MalformedInput, "unknown joint '" + name + "' in angle limits");
    if (!range.is_array() || range.size() != 2) throw Error(ErrorCode::MalformedInput, "limit must be [lo, hi]");
    AngleRange r{range[0].get<double>(), range[1].get<double>()};
    if (r.lo > r.hi || r.lo < 0.0 || r.hi > 180.0) {
      throw Error(ErrorCode::MalformedInput, "limit for '" + name + "' must satisfy 0 <= lo <= hi <= 180");
    }
    limits.ranges[k] = r;
  }
  return limits;
}

inline json to_json(const AngleLimits& limits, const Skeleton& skel) {
  json j = json::object();
  for (const auto& [k, r] : limits.ranges) j[skel.joint_name(k)] = {r.lo, r.hi};
  return j;
}

inline json breakdown_to_json(const ErrorBreakdown& e, const Skeleton& skel) {
  json per = json::object();
  for (std::size_t i = 0; i < e.per_item.size(); ++i) per[skel.joint_name(e.joints[i])] = e.per_item[i];
  return per;
}

inline json to_json(const MetricsReport& r, const Skeleton& skel) {
  json j{{"dims", r.dims},
         {"num_samples", r.num_samples},
         {"units", r.dims == 3 ? "mm" : "px"},
         {"joint_error", r.joint_error.mean},
         {"bone_error", r.bone_error.mean},
         {"per_joint", breakdown_to_json(r.joint_error, skel)},
         {"per_bone", breakdown_to_json(r.bone_error, skel)},
         {"pa_joint_error", nullptr},
         {"pa_scale", r.pa_with_scale},
         {"bone_std", nullptr},
         {"illegal_angle_rate", nullptr},
         {"notes", r.notes}};
  if (r.pa_joint_error) j["pa_joint_error"] = *r.pa_joint_error;
  if (r.bone_std) {
    j["bone_std"] = r.bone_std->mean;
    j["per_bone_std"] = breakdown_to_json(*r.bone_std, skel);
  }
  if (r.illegal_angle) {
    j["illegal_angle_rate"] = r.illegal_angle->rate;
    json per = json::object();
    for (const auto& [k, rate] : r.illegal_angle->per_joint) per[skel.joint_name(k)] = rate;
    j["per_joint_illegal_angle"] = std::move(per);
    j["illegal_angle_counts"] = {{"illegal", r.illegal_angle->illegal},
                                 {"evaluated", r.illegal_angle->evaluated},
                                 {"undefined", r.illegal_angle->undefined}};
  }
  return j;
}

// -- synthetic data and demo configs ------------------------------------------

/// Fields absent from `j` keep the built-in defaults.
inline SynthConfig synth_config_from_json(const json& j) {
  try {
    SynthConfig c = default_synth_config();
    if (j.contains("skeleton")) {
      c.topology = topology_from_json(j.at("skeleton"));
      if (c.topology.num_joints != human36m_topology().num_joints &&
          !(j.contains("bone_lengths") && j.contains("rest_directions") && j.contains("angle_ranges"))) {
        throw Error(ErrorCode::InvalidConfig,
                    "custom skeletons need bone_lengths, rest_directions and angle_ranges");
      }
    }
    if (j.contains("bone_lengths")) c.bone_lengths = j.at("bone_lengths").get<std::vector<double>>();
    if (j.contains("rest_directions")) {
      c.rest_directions.clear();
      for (const auto& d : j.at("rest_directions")) c.rest_directions.emplace_back(d.at(0), d.at(1), d.at(2));
    }
    if (j.contains("angle_ranges")) c.angle_ranges = j.at("angle_ranges").get<std::vector<double>>();
    c.noise = j.value("noise", c.noise);
    c.num_samples = j.value("num_samples", c.num_samples);
    c.seed = j.value("seed", c.seed);
    c.fraction_2d = j.value("fraction_2d", c.fraction_2d);
    if (j.contains("subject_scales")) c.subject_scales = j.at("subject_scales").get<std::vector<double>>();
    if (j.contains("camera")) {
      const auto& cam = j.at("camera");
      c.camera = {cam.at("fx"), cam.at("fy"), cam.at("cx"), cam.at("cy")};
    }
    c.camera_distance = j.value("camera_distance", c.camera_distance);
    require_valid(c);
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("synth config: ") + e.what());
  }
}

inline json to_json(const SynthConfig& c) {
  json dirs = json::array();
  for (const auto& d : c.rest_directions) dirs.push_back({d.x(), d.y(), d.z()});
  return json{{"skeleton", to_json(c.topology)},
              {"bone_lengths", c.bone_lengths},
              {"rest_directions", std::move(dirs)},
              {"angle_ranges", c.angle_ranges},
              {"noise", c.noise},
              {"num_samples", c.num_samples},
              {"seed", c.seed},
              {"fraction_2d", c.fraction_2d},
              {"subject_scales", c.subject_scales},
              {"camera", {{"fx", c.camera.fx}, {"fy", c.camera.fy}, {"cx", c.camera.cx}, {"cy", c.camera.cy}}},
              {"camera_distance", c.camera_distance}};
}

inline DemoConfig demo_config_from_json(const json& j) {
  try {
    DemoConfig c;
    if (j.contains("synth")) c.synth = synth_config_from_json(j.at("synth"));
    c.train_samples = j.value("train_samples", c.train_samples);
    c.test_samples = j.value("test_samples", c.test_samples);
    if (j.contains("train")) {
      const auto& t = j.at("train");
      c.train.epochs = t.value("epochs", c.train.epochs);
      c.train.lr = t.value("lr", c.train.lr);
      c.train.batch_size = t.value("batch_size", c.train.batch_size);
      c.train.momentum = t.value("momentum", c.train.momentum);
      c.train.weight_decay = t.value("weight_decay", c.train.weight_decay);
      c.train.seed = t.value("seed", c.train.seed);
      c.train.balanced_2d_3d = t.value("balanced_2d_3d", c.train.balanced_2d_3d);
    }
    if (j.contains("variants")) {
      c.variants.clear();
      for (const auto& v : j.at("variants")) c.variants.push_back(parse_variant(v.get<std::string>()));
    }
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.eval.pa_with_scale = j.value("pa_scale", c.eval.pa_with_scale);
    if (c.train_samples < 2 || c.test_samples < 2) throw Error(ErrorCode::InvalidConfig, "need >= 2 samples per split");
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("demo config: ") + e.what());
  }
}

inline json to_json(const DemoConfig& c) {
  json variants = json::array();
  for (Variant v : c.variants) variants.push_back(std::string(to_string(v)));
  return json{{"synth", to_json(c.synth)},
              {"train_samples", c.train_samples},
              {"test_samples", c.test_samples},
              {"train",
               {{"epochs", c.train.epochs},
                {"lr", c.train.lr},
                {"batch_size", c.train.batch_size},
                {"momentum", c.train.momentum},
                {"weight_decay", c.train.weight_decay},
                {"seed", c.train.seed},
                {"balanced_2d_3d", c.train.balanced_2d_3d}}},
              {"variants", std::move(variants)},
              {"seeds", c.seeds},
              {"pa_scale", c.eval.pa_with_scale}};
}

struct SummaryRow {
  double joint_error = 0, pa_joint_error = 0, bone_error = 0, bone_std = 0, illegal_angle = 0;
};

inline SummaryRow summarize(const MetricsReport& r) {
  return {r.joint_error.mean, r.pa_joint_error.value_or(0.0), r.bone_error.mean,
          r.bone_std ? r.bone_std->mean : 0.0, r.illegal_angle ? r.illegal_angle->rate : 0.0};
}

inline json to_json(const ComparisonTable& t, const Skeleton& skel) {
  json rows = json::array();
  for (std::size_t v = 0; v < t.variants.size(); ++v) {
    json runs = json::array();
    SummaryRow mean;
    for (std::size_t s = 0; s < t.seeds.size(); ++s) {
      const auto& run = t.at(v, s);
      runs.push_back({{"seed", run.seed}, {"metrics", to_json(run.report, skel)}, {"loss_curve", run.loss_curve}});
      const auto row = summarize(run.report);
      mean.joint_error += row.joint_error;
      mean.pa_joint_error += row.pa_joint_error;
      mean.bone_error += row.bone_error;
      mean.bone_std += row.bone_std;
      mean.illegal_angle += row.illegal_angle;
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, t.seeds.size()));
    rows.push_back({{"variant", std::string(to_string(t.variants[v]))},
                    {"name", std::string(display_name(t.variants[v]))},
                    {"mean",
                     {{"joint_error", mean.joint_error / n},
                      {"pa_joint_error", mean.pa_joint_error / n},
                      {"bone_error", mean.bone_error / n},
                      {"bone_std", mean.bone_std / n},
                      {"illegal_angle_rate", mean.illegal_angle / n}}},
                    {"runs", std::move(runs)}});
  }
  return json{{"seeds", t.seeds}, {"variants", std::move(rows)}};
}

/// Aligned-column rendering shaped like a metric x method results table.
inline std::string to_text(const ComparisonTable& t) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << std::left << std::setw(16) << "Metric";
  for (Variant v : t.variants) os << std::right << std::setw(14) << display_name(v);
  os << '\n';
  const char* names[] = {"Joint Error", "PA Joint Error", "Bone Error", "Bone Std", "Illegal Angle %"};
  for (int m = 0; m < 5; ++m) {
    os << std::left << std::setw(16) << names[m];
    for (std::size_t v = 0; v < t.variants.size(); ++v) {
      double acc = 0.0;
      for (std::size_t s = 0; s < t.seeds.size(); ++s) {
        const auto row = summarize(t.at(v, s).report);
        const double vals[] = {row.joint_error, row.pa_joint_error, row.bone_error, row.bone_std,
                               100.0 * row.illegal_angle};
        acc += vals[m];
      }
      os << std::right << std::setw(14) << acc / static_cast<double>(std::max<std::size_t>(1, t.seeds.size()));
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace posekit::io
