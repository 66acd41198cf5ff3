#pragma once
/**
 * @file motion.hpp
 * Motion level of a single pick-and-place leg.
 *
 * The joint trajectory is a clamped B-spline whose end control points are
 * pinned to the pick and drop configurations. The cost is the grip-point path
 * length, integrated with the trapezoidal rule over `samples` intervals.
 * Constraints are evaluated at every sample node: link endpoints above the
 * ground clearance, grip point inside the robot's (dilated) annulus, joints
 * within limits. Interior control points are optimized by gradient descent
 * on a quadratic-penalty objective with numeric gradients.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>
#include <vector>

#include "handover/bspline.hpp"
#include "handover/geometry.hpp"
#include "handover/kinematics.hpp"

namespace handover {

enum class Confinement { None, Annulus };

struct MotionProblem {
  RobotSpec robot;
  ArmModel arm;
  JointVector q0;
  JointVector q1;
  double ground_clearance{5.0};   ///< minimum height of every link endpoint (mm)
  Confinement confinement{Confinement::Annulus};
  double confinement_margin{5.0}; ///< dilation of the annulus (mm)
  int samples{100};               ///< trapezoid intervals
  int knot_count{3};
  int degree{5};

  void validate() const {
    if (samples < 2) throw DomainError("motion: sample count must be at least 2");
    if (!arm.within_limits(q0) || !arm.within_limits(q1)) throw DomainError("motion: endpoints violate joint limits");
  }
};

/// Builds a problem whose endpoints are the IK solutions at two planar points.
inline MotionProblem make_leg_problem(const RobotSpec& robot, const ArmModel& arm, Point pick, Point drop,
                                      double grasp_height) {
  MotionProblem p;
  p.robot = robot;
  p.arm = arm;
  p.q0 = inverse_kinematics(robot, arm, pick, grasp_height);
  p.q1 = inverse_kinematics(robot, arm, drop, grasp_height);
  return p;
}

enum class ConstraintKind { Ground, Confinement, JointLimit };

inline std::string_view to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::Ground: return "ground";
    case ConstraintKind::Confinement: return "confinement";
    case ConstraintKind::JointLimit: return "joint_limit";
  }
  return "ground";
}

struct Violation {
  int sample{0};
  ConstraintKind kind{ConstraintKind::Ground};
  double magnitude{0.0};  ///< positive amount by which the constraint is missed
};

struct ViolationReport {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }

  [[nodiscard]] double squared_sum() const {
    double s = 0.0;
    for (const Violation& v : violations) s += v.magnitude * v.magnitude;
    return s;
  }

  /// Largest magnitude per (sample, kind), zero where satisfied.
  [[nodiscard]] double magnitude(int sample, ConstraintKind kind) const {
    for (const Violation& v : violations) {
      if (v.sample == sample && v.kind == kind) return v.magnitude;
    }
    return 0.0;
  }
};

inline double sample_tau(int k, int samples) { return static_cast<double>(k) / samples; }

inline std::vector<Vec3> grip_samples(const SplineTrajectory& traj, const MotionProblem& problem) {
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(problem.samples) + 1);
  for (int k = 0; k <= problem.samples; ++k)
    pts.push_back(forward_kinematics(problem.robot, problem.arm, bspline_eval(traj, sample_tau(k, problem.samples))).grip);
  return pts;
}

/// Trapezoidal integral of grip speed; speeds at the sample nodes come from
/// central differences of the sampled grip positions (one-sided at the ends).
inline double path_cost(const SplineTrajectory& traj, const MotionProblem& problem) {
  const std::vector<Vec3> p = grip_samples(traj, problem);
  const int n = problem.samples;
  const double h = 1.0 / n;
  std::vector<double> speed(static_cast<std::size_t>(n) + 1);
  speed.front() = (p[1] - p[0]).norm() / h;
  speed.back() = (p[static_cast<std::size_t>(n)] - p[static_cast<std::size_t>(n - 1)]).norm() / h;
  for (int k = 1; k < n; ++k)
    speed[static_cast<std::size_t>(k)] =
        (p[static_cast<std::size_t>(k + 1)] - p[static_cast<std::size_t>(k - 1)]).norm() / (2.0 * h);
  double cost = 0.0;
  for (int k = 0; k < n; ++k)
    cost += 0.5 * h * (speed[static_cast<std::size_t>(k)] + speed[static_cast<std::size_t>(k + 1)]);
  return cost;
}

inline ViolationReport check_constraints(const SplineTrajectory& traj, const MotionProblem& problem) {
  ViolationReport report;
  for (int k = 0; k <= problem.samples; ++k) {
    const JointVector q = bspline_eval(traj, sample_tau(k, problem.samples));
    const ArmPose pose = forward_kinematics(problem.robot, problem.arm, q);

    double ground = 0.0;
    for (const Vec3& v : {pose.shoulder, pose.elbow, pose.wrist, pose.grip})
      ground = std::max(ground, problem.ground_clearance - v.z);
    if (ground > 0.0) report.violations.push_back({k, ConstraintKind::Ground, ground});

    if (problem.confinement == Confinement::Annulus) {
      const double rho = distance({pose.grip.x, pose.grip.y}, problem.robot.base);
      const double inner = problem.robot.r_min - problem.confinement_margin - rho;
      const double outer = rho - problem.robot.r_max - problem.confinement_margin;
      const double miss = std::max(inner, outer);
      if (miss > 0.0) report.violations.push_back({k, ConstraintKind::Confinement, miss});
    }

    double limit = 0.0;
    for (std::size_t j = 0; j < kJointCount; ++j)
      limit = std::max({limit, problem.arm.lower[j] - q[j], q[j] - problem.arm.upper[j]});
    if (limit > 0.0) report.violations.push_back({k, ConstraintKind::JointLimit, limit});
  }
  return report;
}

struct MotionResult {
  bool feasible{false};
  SplineTrajectory trajectory;
  double cost{0.0};
  double initial_cost{0.0};
  int iterations{0};
  ViolationReport report;
};

struct OptimizerOptions {
  std::vector<double> penalty_schedule{1.0, 10.0, 100.0, 1000.0};
  int iterations_per_stage{60};
  double gradient_step{1e-6};  ///< central-difference step (rad)
  double initial_step{0.2};    ///< first trial step length along the gradient (rad)
  double min_step{1e-9};
};

inline double penalized_objective(const SplineTrajectory& traj, const MotionProblem& problem, double penalty) {
  return path_cost(traj, problem) + penalty * check_constraints(traj, problem).squared_sum();
}

/// Central-difference gradient of `f` with respect to the interior control
/// coordinates, laid out as [control 1 joints..., control 2 joints..., ...].
template <typename Objective>
std::vector<double> interior_gradient(const SplineTrajectory& traj, Objective&& f, double step) {
  std::vector<double> g;
  SplineTrajectory probe = traj;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const double orig = probe.control[i][j];
      probe.control[i][j] = orig + step;
      const double fp = f(probe);
      probe.control[i][j] = orig - step;
      const double fm = f(probe);
      probe.control[i][j] = orig;
      g.push_back((fp - fm) / (2.0 * step));
    }
  }
  return g;
}

/// Numeric gradient of path_cost over the interior control coordinates.
inline std::vector<double> path_cost_gradient(const SplineTrajectory& traj, const MotionProblem& problem,
                                              double step = 1e-6) {
  return interior_gradient(traj, [&](const SplineTrajectory& t) { return path_cost(t, problem); }, step);
}

inline MotionResult optimize_traj(const MotionProblem& problem, const OptimizerOptions& opts = {}) {
  problem.validate();
  const SplineTrajectory init = SplineTrajectory::straight(problem.knot_count, problem.degree, problem.q0, problem.q1);
  const ViolationReport init_report = check_constraints(init, problem);
  const double init_cost = path_cost(init, problem);

  SplineTrajectory cur = init;
  int iterations = 0;
  for (double penalty : opts.penalty_schedule) {
    auto objective = [&](const SplineTrajectory& t) { return penalized_objective(t, problem, penalty); };
    double value = objective(cur);
    double step = opts.initial_step;
    for (int it = 0; it < opts.iterations_per_stage; ++it) {
      const std::vector<double> g = interior_gradient(cur, objective, opts.gradient_step);
      double norm = 0.0;
      for (double v : g) norm += v * v;
      norm = std::sqrt(norm);
      if (!(norm > 1e-12)) break;

      // Backtracking line search along the normalized steepest-descent direction.
      bool moved = false;
      step = std::min(opts.initial_step, 4.0 * step);
      while (step >= opts.min_step) {
        SplineTrajectory trial = cur;
        std::size_t idx = 0;
        for (std::size_t i = 1; i + 1 < trial.size(); ++i)
          for (std::size_t j = 0; j < kJointCount; ++j) trial.control[i][j] -= step * g[idx++] / norm;
        const double tv = objective(trial);
        if (tv <= value - 1e-4 * step * norm) {
          cur = std::move(trial);
          value = tv;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      ++iterations;
      if (!moved) break;
    }
  }

  MotionResult out;
  out.initial_cost = init_cost;
  out.iterations = iterations;
  const ViolationReport report = check_constraints(cur, problem);
  const double cost = path_cost(cur, problem);
  if (report.ok() && (!init_report.ok() || cost <= init_cost)) {
    out.feasible = true;
    out.trajectory = cur;
    out.cost = cost;
    out.report = report;
  } else if (init_report.ok()) {
    out.feasible = true;
    out.trajectory = init;
    out.cost = init_cost;
    out.report = init_report;
  } else {
    out.feasible = false;
    out.trajectory = cur;
    out.cost = cost;
    out.report = report;
  }
  return out;
}

}  // namespace handover
