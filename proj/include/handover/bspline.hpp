#pragma once

// Clamped uniform B-splines over tau in [0, 1] with joint-vector control points.
//
// With m distinct knots and degree d there are N = m + d - 1 basis functions;
// the full knot vector repeats 0 and 1 (d + 1) times each.

#include <cmath>
#include <vector>

#include "handover/kinematics.hpp"
#include "handover/types.hpp"

namespace handover {

/// Clamped knot vector with `knot_count` distinct, uniformly spaced knots.
inline std::vector<double> clamped_uniform_knots(int knot_count, int degree) {
  if (knot_count < 2) throw DomainError("bspline: at least two distinct knots are required");
  if (degree < 1) throw DomainError("bspline: degree must be positive");
  std::vector<double> knots;
  knots.insert(knots.end(), static_cast<std::size_t>(degree), 0.0);
  for (int i = 0; i < knot_count; ++i) knots.push_back(static_cast<double>(i) / (knot_count - 1));
  knots.insert(knots.end(), static_cast<std::size_t>(degree), 1.0);
  return knots;
}

/// Number of basis functions for m distinct knots and degree d.
inline int basis_count(int knot_count, int degree) { return knot_count + degree - 1; }

/// Values of all N basis functions at tau (Cox-de Boor, nonzero span only).
inline std::vector<double> bspline_basis(const std::vector<double>& knots, int degree, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("bspline: tau must lie in [0, 1]");
  const int n = static_cast<int>(knots.size()) - degree - 1;  // basis count
  const int p = degree;

  // Span index with knots[span] <= tau < knots[span + 1]; tau = 1 uses the last span.
  int span = n - 1;
  if (tau < knots[static_cast<std::size_t>(n)]) {
    int lo = p;
    int hi = n;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (tau < knots[static_cast<std::size_t>(mid)]) hi = mid; else lo = mid;
    }
    span = lo;
  }

  std::vector<double> local(static_cast<std::size_t>(p + 1), 0.0);
  std::vector<double> left(static_cast<std::size_t>(p + 1), 0.0);
  std::vector<double> right(static_cast<std::size_t>(p + 1), 0.0);
  local[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[static_cast<std::size_t>(j)] = tau - knots[static_cast<std::size_t>(span + 1 - j)];
    right[static_cast<std::size_t>(j)] = knots[static_cast<std::size_t>(span + j)] - tau;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
      const double tmp = local[static_cast<std::size_t>(r)] / denom;
      local[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * tmp;
      saved = left[static_cast<std::size_t>(j - r)] * tmp;
    }
    local[static_cast<std::size_t>(j)] = saved;
  }

  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r <= p; ++r) out[static_cast<std::size_t>(span - p + r)] = local[static_cast<std::size_t>(r)];
  return out;
}

/// Joint-space B-spline trajectory.
struct SplineTrajectory {
  int degree{5};
  int knot_count{3};
  std::vector<double> knots;
  std::vector<JointVector> control;

  static SplineTrajectory clamped(int knot_count, int degree, std::vector<JointVector> control) {
    if (static_cast<int>(control.size()) != basis_count(knot_count, degree))
      throw DomainError("bspline: control point count must equal knot_count + degree - 1");
    SplineTrajectory t;
    t.degree = degree;
    t.knot_count = knot_count;
    t.knots = clamped_uniform_knots(knot_count, degree);
    t.control = std::move(control);
    return t;
  }

  /// Control points placed at the Greville abscissae of a straight joint-space
  /// segment, which the spline then reproduces exactly.
  static SplineTrajectory straight(int knot_count, int degree, const JointVector& q0, const JointVector& q1) {
    const auto knots = clamped_uniform_knots(knot_count, degree);
    const int n = basis_count(knot_count, degree);
    std::vector<JointVector> ctrl;
    ctrl.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double g = 0.0;
      for (int k = 1; k <= degree; ++k) g += knots[static_cast<std::size_t>(i + k)];
      g /= degree;
      ctrl.push_back(q0 + (q1 - q0) * g);
    }
    ctrl.front() = q0;
    ctrl.back() = q1;
    return clamped(knot_count, degree, std::move(ctrl));
  }

  [[nodiscard]] std::size_t size() const { return control.size(); }
};

/// De Boor evaluation. Each blend is written as a + t (b - a), so a constant
/// control polygon evaluates exactly to that constant.
inline JointVector bspline_eval(const SplineTrajectory& traj, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("bspline: tau must lie in [0, 1]");
  const auto& t = traj.knots;
  const int p = traj.degree;
  const int n = static_cast<int>(traj.control.size());
  int k = n - 1;
  if (tau < t[static_cast<std::size_t>(n)]) {
    k = p;
    while (tau >= t[static_cast<std::size_t>(k + 1)]) ++k;
  }
  std::vector<JointVector> d(traj.control.begin() + (k - p), traj.control.begin() + (k + 1));
  for (int r = 1; r <= p; ++r) {
    for (int j = p; j >= r; --j) {
      const double lo = t[static_cast<std::size_t>(j + k - p)];
      const double hi = t[static_cast<std::size_t>(j + 1 + k - r)];
      const double a = (tau - lo) / (hi - lo);
      auto& dj = d[static_cast<std::size_t>(j)];
      const auto& prev = d[static_cast<std::size_t>(j - 1)];
      if (a == 1.0) continue;
      dj = a == 0.0 ? prev : prev + (dj - prev) * a;
    }
  }
  return d[static_cast<std::size_t>(p)];
}

}  // namespace handover
