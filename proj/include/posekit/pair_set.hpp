#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "posekit/skeleton.hpp"
#include "posekit/types.hpp"

namespace posekit {

enum class PairSetKind { joint, bone, both, all, custom };

inline std::string_view to_string(PairSetKind kind) {
  switch (kind) {
    case PairSetKind::joint: return "joint";
    case PairSetKind::bone: return "bone";
    case PairSetKind::both: return "both";
    case PairSetKind::all: return "all";
    case PairSetKind::custom: return "custom";
  }
  return "custom";
}

inline PairSetKind parse_pair_set_kind(std::string_view name) {
  if (name == "joint") return PairSetKind::joint;
  if (name == "bone") return PairSetKind::bone;
  if (name == "both") return PairSetKind::both;
  if (name == "all") return PairSetKind::all;
  if (name == "custom") return PairSetKind::custom;
  throw Error(ErrorCode::InvalidConfig, "unknown pair set kind '" + std::string(name) + "'");
}

struct JointPair {
  int u = 0;
  int v = 0;

  friend bool operator==(const JointPair&, const JointPair&) = default;
  friend auto operator<=>(const JointPair&, const JointPair&) = default;
};

/// Joint pairs whose relative positions J_u - J_v enter the compositional
/// loss, each with its precomputed tree path.
struct PairSet {
  PairSetKind kind = PairSetKind::custom;
  std::vector<JointPair> pairs;
  std::vector<TreePath> paths;
  /// Indices into `pairs` sorted by (u, v); reductions iterate in this order so
  /// that results do not depend on the listing order of the pairs.
  std::vector<std::size_t> canonical_order;

  std::size_t size() const { return pairs.size(); }
};

/// Builds a pair set from an explicit list. Rejects duplicates, reversed
/// duplicates, self-pairs and out-of-range indices.
inline PairSet make_pair_set(const Skeleton& skel, std::vector<JointPair> pairs,
                             PairSetKind kind = PairSetKind::custom) {
  std::set<std::pair<int, int>> seen;
  PairSet ps;
  ps.kind = kind;
  ps.paths.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!skel.contains(p.u) || !skel.contains(p.v) || p.u == p.v) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "invalid pair (" + std::to_string(p.u) + "," + std::to_string(p.v) + ")");
    }
    const auto key = std::minmax(p.u, p.v);
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::InvalidConfig,
                  "duplicate pair (" + std::to_string(p.u) + "," + std::to_string(p.v) + ")");
    }
    ps.paths.push_back(path_between(skel, p.u, p.v));
  }
  ps.pairs = std::move(pairs);
  ps.canonical_order.resize(ps.pairs.size());
  for (std::size_t i = 0; i < ps.pairs.size(); ++i) ps.canonical_order[i] = i;
  std::sort(ps.canonical_order.begin(), ps.canonical_order.end(),
            [&ps](std::size_t a, std::size_t b) { return ps.pairs[a] < ps.pairs[b]; });
  return ps;
}

inline PairSet build_pair_set(PairSetKind kind, const Skeleton& skel) {
  const int k_count = skel.num_joints();
  std::vector<JointPair> pairs;
  switch (kind) {
    case PairSetKind::joint:
      for (int u = 1; u <= k_count; ++u) pairs.push_back({u, 0});
      break;
    case PairSetKind::bone:
      for (int u = 1; u <= k_count; ++u) pairs.push_back({u, skel.parent(u)});
      break;
    case PairSetKind::both:
      for (int u = 1; u <= k_count; ++u) pairs.push_back({u, 0});
      // the root's bone pair (root, 0) is already a joint pair
      for (int u = 1; u <= k_count; ++u) {
        if (skel.parent(u) != 0) pairs.push_back({u, skel.parent(u)});
      }
      break;
    case PairSetKind::all:
      for (int u = 1; u <= k_count; ++u) {
        for (int v = u + 1; v <= k_count; ++v) pairs.push_back({u, v});
      }
      break;
    case PairSetKind::custom:
      throw Error(ErrorCode::InvalidConfig, "custom pair sets are built with make_pair_set");
  }
  return make_pair_set(skel, std::move(pairs), kind);
}

/// Row i holds J_u - J_v for pair i, with J_0 the zero vector.
inline Coords pair_deltas(const Coords& joints, const PairSet& ps) {
  Coords out = Coords::Zero(static_cast<Eigen::Index>(ps.size()), joints.cols());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto [u, v] = ps.pairs[i];
    if (u > 0) out.row(i) += joints.row(u - 1);
    if (v > 0) out.row(i) -= joints.row(v - 1);
  }
  return out;
}

}  // namespace posekit
