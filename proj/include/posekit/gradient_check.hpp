#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>

#include "posekit/error.hpp"
#include "posekit/types.hpp"

namespace posekit {

template <typename R>
concept GradientResult = requires(const R& r) {
  { r.value } -> std::convertible_to<double>;
  { r.grad } -> std::convertible_to<Coords>;
};

template <typename F>
concept DifferentiableFunction = requires(const F& f, const Coords& x) {
  { f(x) } -> GradientResult;
};

struct GradientCheckOptions {
  double epsilon = 1e-5;
  /// Points whose smallest |residual| is below this are rejected.
  double kink_margin = 1e-3;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  /// Per-coordinate error |analytic - numeric| / max(1, |analytic|, |numeric|).
  Coords relative_error;
  Coords analytic;
  Coords numeric;
};

/// Central-difference check of an analytic gradient. Throws KinkProximity when
/// the function reports a residual closer than `kink_margin` to an L1 kink.
template <DifferentiableFunction F>
GradientCheckReport finite_difference_check(const F& fn, const Coords& point, const GradientCheckOptions& opts = {}) {
  const auto base = fn(point);
  if constexpr (requires { base.min_abs_residual; }) {
    if (base.min_abs_residual < opts.kink_margin) {
      throw Error(ErrorCode::KinkProximity, "evaluation point lies within " + std::to_string(opts.kink_margin) +
                                                " of an L1 kink (|r| = " + std::to_string(base.min_abs_residual) + ")");
    }
  }
  GradientCheckReport rep;
  rep.analytic = base.grad;
  rep.numeric = Coords::Zero(point.rows(), point.cols());
  rep.relative_error = Coords::Zero(point.rows(), point.cols());
  Coords x = point;
  for (Eigen::Index i = 0; i < point.rows(); ++i) {
    for (Eigen::Index j = 0; j < point.cols(); ++j) {
      const double saved = x(i, j);
      x(i, j) = saved + opts.epsilon;
      const double plus = fn(x).value;
      x(i, j) = saved - opts.epsilon;
      const double minus = fn(x).value;
      x(i, j) = saved;
      const double num = (plus - minus) / (2.0 * opts.epsilon);
      const double ana = rep.analytic(i, j);
      rep.numeric(i, j) = num;
      const double err = std::abs(ana - num) / std::max({1.0, std::abs(ana), std::abs(num)});
      rep.relative_error(i, j) = err;
      rep.max_relative_error = std::max(rep.max_relative_error, err);
    }
  }
  return rep;
}

}  // namespace posekit
