#pragma once

// Shared value types for the two-arm hand-over problem: planar points, robot
// identifiers, object poses and the error types used across the library.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace handover {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Membership slack (mm) granted to points produced by floating-point
/// mappings such as the (alpha, beta) parametrization. Exact predicates take
/// a tolerance argument that defaults to zero.
inline constexpr double kBoundaryTolerance = 1e-9;

/// Thrown when an argument lies outside an operation's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when a configuration violates its invariants.
class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Wraps an angle into (-pi, pi]. An input of -pi maps to +pi.
inline double wrap_angle(double x) {
  if (!std::isfinite(x)) throw DomainError("wrap_angle: non-finite input");
  double r = std::remainder(x, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

struct Point {
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Reflection across the x-axis, the mirror line between the two bases.
inline Point mirror(Point p) { return {p.x, -p.y}; }

enum class RobotId { L, R };

inline constexpr std::array<RobotId, 2> kRobots{RobotId::L, RobotId::R};

inline RobotId other(RobotId id) { return id == RobotId::L ? RobotId::R : RobotId::L; }

inline std::string_view to_string(RobotId id) { return id == RobotId::L ? "L" : "R"; }

inline RobotId robot_from_string(std::string_view s) {
  if (s == "L" || s == "l") return RobotId::L;
  if (s == "R" || s == "r") return RobotId::R;
  throw DomainError("unknown robot id '" + std::string(s) + "'");
}

/// Planar object pose: position in mm and yaw in (-pi, pi].
struct ObjectState {
  double x{0.0};
  double y{0.0};
  double theta{0.0};

  [[nodiscard]] Point position() const { return {x, y}; }

  friend bool operator==(const ObjectState&, const ObjectState&) = default;
};

/// Mirror image of a pose: position reflected across the x-axis, yaw negated.
inline ObjectState mirror(const ObjectState& s) { return {s.x, -s.y, wrap_angle(-s.theta)}; }

}  // namespace handover
