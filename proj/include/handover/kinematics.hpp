#pragma once

// Reach and yaw model of a five-joint arm on a fixed base.
//
// With wrist pitch and roll at zero during grasp, the only joint that turns
// the gripper about the vertical is the base yaw, so the gripper yaw at a
// planar point equals the azimuth of that point seen from the base. A grasped
// object keeps its pose relative to the gripper, hence its yaw changes by the
// azimuth difference between drop-off and pick-up.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "handover/geometry.hpp"
#include "handover/types.hpp"

namespace handover {

/// Gripper yaw imposed at p by `robot`: the azimuth of p from the base.
inline double yaw_at(const RobotSpec& robot, Point p) {
  if (!contains(robot, p, kBoundaryTolerance))
    throw DomainError("yaw_at: point unreachable by robot " + std::string(to_string(robot.id)));
  return wrap_angle(std::atan2(p.y - robot.base.y, p.x - robot.base.x));
}

/// Object yaw change for a pick at `pick` and drop at `drop` by `robot`.
inline double delta_theta(const RobotSpec& robot, Point pick, Point drop) {
  return wrap_angle(yaw_at(robot, drop) - yaw_at(robot, pick));
}

inline constexpr std::size_t kJointCount = 5;

/// Joint angles: base yaw, shoulder, elbow, wrist pitch, wrist roll (rad).
/// Shoulder is the elevation of the upper arm; elbow and wrist pitch are
/// relative to the preceding link.
struct JointVector {
  std::array<double, kJointCount> q{};

  double& operator[](std::size_t i) { return q[i]; }
  double operator[](std::size_t i) const { return q[i]; }

  JointVector& operator+=(const JointVector& o) {
    for (std::size_t i = 0; i < kJointCount; ++i) q[i] += o.q[i];
    return *this;
  }
  JointVector& operator-=(const JointVector& o) {
    for (std::size_t i = 0; i < kJointCount; ++i) q[i] -= o.q[i];
    return *this;
  }
  JointVector& operator*=(double s) {
    for (double& v : q) v *= s;
    return *this;
  }
  friend JointVector operator+(JointVector a, const JointVector& b) { return a += b; }
  friend JointVector operator-(JointVector a, const JointVector& b) { return a -= b; }
  friend JointVector operator*(JointVector a, double s) { return a *= s; }
  friend JointVector operator*(double s, JointVector a) { return a *= s; }
  friend bool operator==(const JointVector&, const JointVector&) = default;
};

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  [[nodiscard]] double norm() const { return std::sqrt(x * x + y * y + z * z); }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Rigid-chain arm. Flat-pose horizontal reach equals upper_arm + forearm + grip.
struct ArmModel {
  double mount_height{70.0};  ///< base to shoulder axis
  double upper_arm{95.0};
  double forearm{120.0};
  double grip{15.0};          ///< wrist axis to grip point
  JointVector lower{{-kPi, -kPi / 2.0, -kPi, -kPi / 2.0, -kPi / 2.0}};
  JointVector upper{{kPi, kPi, kPi, kPi / 2.0, kPi / 2.0}};

  [[nodiscard]] double reach() const { return upper_arm + forearm + grip; }

  [[nodiscard]] bool within_limits(const JointVector& q, double tol = 0.0) const {
    for (std::size_t i = 0; i < kJointCount; ++i) {
      if (q[i] < lower[i] - tol || q[i] > upper[i] + tol) return false;
    }
    return true;
  }

  /// Checks that the flat-pose reach matches the robot's outer radius.
  void validate_against(const RobotSpec& robot) const {
    if (!(mount_height > 0.0 && upper_arm > 0.0 && forearm > 0.0 && grip >= 0.0))
      throw InvalidConfig("arm: link lengths must be positive");
    if (std::abs(reach() - robot.r_max) > 1e-9)
      throw InvalidConfig("arm: flat-pose reach must equal the robot's r_max");
  }
};

/// Link endpoints of the chain, from the base upwards.
struct ArmPose {
  Vec3 base;
  Vec3 shoulder;
  Vec3 elbow;
  Vec3 wrist;
  Vec3 grip;

  [[nodiscard]] std::array<Vec3, 5> points() const { return {base, shoulder, elbow, wrist, grip}; }
};

/// All-zero joints: arm straight and horizontal along +x at shoulder height.
inline ArmPose forward_kinematics(const RobotSpec& robot, const ArmModel& arm, const JointVector& q) {
  const double c0 = std::cos(q[0]);
  const double s0 = std::sin(q[0]);
  const double e1 = q[1];
  const double e2 = e1 + q[2];
  const double e3 = e2 + q[3];

  ArmPose pose;
  pose.base = {robot.base.x, robot.base.y, 0.0};
  pose.shoulder = {robot.base.x, robot.base.y, arm.mount_height};

  auto advance = [&](Vec3 from, double len, double elev) {
    const double h = len * std::cos(elev);
    return Vec3{from.x + h * c0, from.y + h * s0, from.z + len * std::sin(elev)};
  };
  pose.elbow = advance(pose.shoulder, arm.upper_arm, e1);
  pose.wrist = advance(pose.elbow, arm.forearm, e2);
  pose.grip = advance(pose.wrist, arm.grip, e3);
  return pose;
}

/// Elbow-up solution placing the grip point at (p, z) with wrist pitch and
/// roll at zero and base yaw equal to yaw_at(robot, p).
inline JointVector inverse_kinematics(const RobotSpec& robot, const ArmModel& arm, Point p, double z) {
  if (!contains(robot, p, kBoundaryTolerance))
    throw DomainError("inverse_kinematics: point outside the robot's annulus");
  const double rho = distance(p, robot.base);
  const double dz = z - arm.mount_height;
  const double a = arm.upper_arm;
  const double b = arm.forearm + arm.grip;
  const double s = std::hypot(rho, dz);
  constexpr double slack = 1e-9;
  if (s > a + b + slack || s < std::abs(a - b) - slack)
    throw DomainError("inverse_kinematics: pose outside vertical reach");

  const double c2 = std::clamp((s * s - a * a - b * b) / (2.0 * a * b), -1.0, 1.0);
  const double elbow = -std::acos(c2);
  const double shoulder = std::atan2(dz, rho) - std::atan2(b * std::sin(elbow), a + b * std::cos(elbow));

  JointVector q;
  q[0] = yaw_at(robot, p);
  q[1] = shoulder;
  q[2] = elbow == 0.0 ? 0.0 : elbow;
  q[3] = 0.0;
  q[4] = 0.0;
  if (!arm.within_limits(q)) throw DomainError("inverse_kinematics: solution violates joint limits");
  return q;
}

}  // namespace handover
