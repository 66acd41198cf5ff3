#pragma once
/**
 * @file geometry.hpp
 * Individual, global and mutual manipulation spaces of two mirrored arms.
 *
 * Frame convention: the origin sits midway between the two bases, which lie
 * on the y-axis at (0, +d/2) for L and (0, -d/2) for R. The x-axis is the
 * mirror line. Each arm reaches the closed annulus r_min <= |p - base| <= r_max.
 *
 * The mutual space is parametrized by (alpha, beta) in [-1, 1]^2:
 *   x = alpha * x_max,  y = beta * y_bar(x)
 * where y_bar follows the inner circle of the nearer arm for |x| <= x_prime and
 * the outer circle of the farther arm beyond.
 */

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "handover/random.hpp"
#include "handover/types.hpp"

namespace handover {

struct RobotSpec {
  RobotId id{RobotId::L};
  Point base{};
  double r_min{150.0};
  double r_max{230.0};
};

/// Closed annulus membership with optional outward slack.
inline bool contains(const RobotSpec& robot, Point p, double tol = 0.0) {
  const double r = distance(p, robot.base);
  return r >= robot.r_min - tol && r <= robot.r_max + tol;
}

struct WorkspaceConfig {
  RobotSpec left{RobotId::L, {0.0, 175.0}, 150.0, 230.0};
  RobotSpec right{RobotId::R, {0.0, -175.0}, 150.0, 230.0};
  double d{350.0};
  double grid_pitch{5.0};

  /// Mirrored pair with bases at (0, +-d/2).
  static WorkspaceConfig symmetric(double r_min = 150.0, double r_max = 230.0, double d = 350.0,
                                   double grid_pitch = 5.0) {
    WorkspaceConfig cfg;
    cfg.left = {RobotId::L, {0.0, d / 2.0}, r_min, r_max};
    cfg.right = {RobotId::R, {0.0, -d / 2.0}, r_min, r_max};
    cfg.d = d;
    cfg.grid_pitch = grid_pitch;
    return cfg;
  }

  [[nodiscard]] const RobotSpec& robot(RobotId id) const { return id == RobotId::L ? left : right; }

  void validate() const {
    auto fail = [](const std::string& what) { throw InvalidConfig("workspace: " + what); };
    if (left.id != RobotId::L || right.id != RobotId::R) fail("robots must be ordered (L, R)");
    for (const auto* r : {&left, &right}) {
      if (!(r->r_min > 0.0 && r->r_min < r->r_max)) fail("require 0 < r_min < r_max");
    }
    if (left.r_min != right.r_min || left.r_max != right.r_max) fail("radii of L and R must match");
    if (left.base != Point{0.0, d / 2.0} || right.base != Point{0.0, -d / 2.0})
      fail("bases must sit at (0, +d/2) and (0, -d/2)");
    const double rmin = left.r_min;
    const double rmax = left.r_max;
    if (!(d >= 2.0 * rmin)) fail("require d >= 2 r_min");
    if (!(d < 2.0 * rmax)) fail("require d < 2 r_max (mutual space is empty)");
    if (!(d < rmin + rmax)) fail("require d < r_min + r_max (inner circles must bound the mutual space)");
    if (!(grid_pitch > 0.0)) fail("grid_pitch must be positive");
  }
};

/// Derived constants of the mutual-space parametrization.
struct GeometryBounds {
  double x_max{0.0};    ///< half-chord of the two outer circles
  double x_prime{0.0};  ///< |x| where the y-bound switches from inner to outer circle
};

inline GeometryBounds derive_bounds(const WorkspaceConfig& cfg) {
  cfg.validate();
  const double d = cfg.d;
  const double rmin = cfg.left.r_min;
  const double rmax = cfg.left.r_max;
  GeometryBounds b;
  b.x_max = std::sqrt(rmax * rmax - d * d / 4.0);
  const double k = d * d - rmin * rmin + rmax * rmax;
  const double num = 4.0 * d * d * rmax * rmax - k * k;
  if (!(num > 0.0)) throw InvalidConfig("workspace: inner and outer circles do not intersect");
  b.x_prime = std::sqrt(num / (4.0 * d * d));
  if (!(std::isfinite(b.x_max) && b.x_prime > 0.0 && b.x_prime < b.x_max))
    throw InvalidConfig("workspace: degenerate mutual space");
  return b;
}

inline bool union_contains(const WorkspaceConfig& cfg, Point p, double tol = 0.0) {
  return contains(cfg.left, p, tol) || contains(cfg.right, p, tol);
}

inline bool mutual_contains(const WorkspaceConfig& cfg, Point p, double tol = 0.0) {
  return contains(cfg.left, p, tol) && contains(cfg.right, p, tol);
}

/// Lattice index; the cell center is (i * pitch, j * pitch).
struct GridCell {
  int i{0};
  int j{0};

  [[nodiscard]] Point center(double pitch) const { return {i * pitch, j * pitch}; }

  friend bool operator==(const GridCell&, const GridCell&) = default;
  friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

/// Rasterized manipulation spaces. All cell lists are sorted by (i, j).
struct GridApproximation {
  double pitch{5.0};
  std::vector<GridCell> cells_L;
  std::vector<GridCell> cells_R;
  std::vector<GridCell> cells_union;
  std::vector<GridCell> cells_mutual;

  [[nodiscard]] static bool has(const std::vector<GridCell>& cells, GridCell c) {
    return std::binary_search(cells.begin(), cells.end(), c);
  }
};

/// Validated workspace with cached parametrization constants. Immutable.
class Workspace {
 public:
  explicit Workspace(WorkspaceConfig cfg = {}) : cfg_(std::move(cfg)), bounds_(derive_bounds(cfg_)) {}

  [[nodiscard]] const WorkspaceConfig& config() const { return cfg_; }
  [[nodiscard]] const GeometryBounds& bounds() const { return bounds_; }
  [[nodiscard]] const RobotSpec& robot(RobotId id) const { return cfg_.robot(id); }

  [[nodiscard]] bool contains(RobotId id, Point p, double tol = 0.0) const {
    return handover::contains(cfg_.robot(id), p, tol);
  }
  [[nodiscard]] bool union_contains(Point p, double tol = 0.0) const {
    return handover::union_contains(cfg_, p, tol);
  }
  [[nodiscard]] bool mutual_contains(Point p, double tol = 0.0) const {
    return handover::mutual_contains(cfg_, p, tol);
  }

  /// Upper y-bound of the mutual space at abscissa x; zero outside [-x_max, x_max].
  [[nodiscard]] double y_bar(double x) const {
    const double ax = std::abs(x);
    const double half_d = cfg_.d / 2.0;
    const double rmin = cfg_.left.r_min;
    const double rmax = cfg_.left.r_max;
    if (ax > bounds_.x_max) return 0.0;
    double y = 0.0;
    if (ax <= bounds_.x_prime) {
      y = half_d - std::sqrt(std::max(0.0, rmin * rmin - ax * ax));
    } else {
      y = -half_d + std::sqrt(std::max(0.0, rmax * rmax - ax * ax));
    }
    return std::max(0.0, y);
  }

  [[nodiscard]] Point param_to_point(double alpha, double beta) const {
    if (!(alpha >= -1.0 && alpha <= 1.0 && beta >= -1.0 && beta <= 1.0))
      throw DomainError("param_to_point: (alpha, beta) must lie in [-1, 1]^2");
    const double x = alpha * bounds_.x_max;
    return {x, beta * y_bar(x)};
  }

  [[nodiscard]] std::pair<double, double> point_to_param(Point p) const {
    if (!mutual_contains(p, kBoundaryTolerance))
      throw DomainError("point_to_param: point outside the mutual space");
    const double alpha = std::clamp(p.x / bounds_.x_max, -1.0, 1.0);
    const double yb = y_bar(alpha * bounds_.x_max);
    const double beta = yb > 0.0 ? std::clamp(p.y / yb, -1.0, 1.0) : 0.0;
    return {alpha, beta};
  }

  [[nodiscard]] GridApproximation rasterize(double pitch) const {
    if (!(pitch > 0.0)) throw DomainError("rasterize: pitch must be positive");
    GridApproximation g;
    g.pitch = pitch;
    const double rmax = cfg_.left.r_max;
    const double ymax = cfg_.d / 2.0 + rmax;
    const int i_lo = static_cast<int>(std::ceil(-rmax / pitch));
    const int i_hi = static_cast<int>(std::floor(rmax / pitch));
    const int j_lo = static_cast<int>(std::ceil(-ymax / pitch));
    const int j_hi = static_cast<int>(std::floor(ymax / pitch));
    for (int i = i_lo; i <= i_hi; ++i) {
      for (int j = j_lo; j <= j_hi; ++j) {
        const GridCell c{i, j};
        const Point p = c.center(pitch);
        const bool in_l = handover::contains(cfg_.left, p);
        const bool in_r = handover::contains(cfg_.right, p);
        if (in_l) g.cells_L.push_back(c);
        if (in_r) g.cells_R.push_back(c);
        if (in_l || in_r) g.cells_union.push_back(c);
        if (in_l && in_r) g.cells_mutual.push_back(c);
      }
    }
    return g;
  }

  [[nodiscard]] GridApproximation rasterize() const { return rasterize(cfg_.grid_pitch); }

  /// Rejection sample of a pose: position uniform over the union region,
  /// yaw uniform in (-pi, pi].
  [[nodiscard]] ObjectState sample_state(Rng& rng) const {
    const double rmax = cfg_.left.r_max;
    const double ymax = cfg_.d / 2.0 + rmax;
    for (;;) {
      const Point p{uniform(rng, -rmax, rmax), uniform(rng, -ymax, ymax)};
      if (union_contains(p)) return {p.x, p.y, uniform_angle(rng)};
    }
  }

 private:
  WorkspaceConfig cfg_;
  GeometryBounds bounds_;
};

/// Writes every lattice point of the union region as `x,y,inL,inR`.
inline void write_grid_csv(std::ostream& os, const GridApproximation& g) {
  os << "x,y,inL,inR\n";
  for (const GridCell& c : g.cells_union) {
    const Point p = c.center(g.pitch);
    os << p.x << ',' << p.y << ',' << (GridApproximation::has(g.cells_L, c) ? 1 : 0) << ','
       << (GridApproximation::has(g.cells_R, c) ? 1 : 0) << '\n';
  }
}

/// Inverse of write_grid_csv for a known pitch.
inline GridApproximation read_grid_csv(std::istream& is, double pitch) {
  GridApproximation g;
  g.pitch = pitch;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "x,y,inL,inR") continue;
    std::istringstream ss(line);
    double x = 0, y = 0;
    int in_l = 0, in_r = 0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ss >> x >> c1 >> y >> c2 >> in_l >> c3 >> in_r) || c1 != ',' || c2 != ',' || c3 != ',')
      throw DomainError("grid csv: malformed line " + std::to_string(lineno));
    const GridCell c{static_cast<int>(std::lround(x / pitch)), static_cast<int>(std::lround(y / pitch))};
    if (in_l) g.cells_L.push_back(c);
    if (in_r) g.cells_R.push_back(c);
    if (in_l || in_r) g.cells_union.push_back(c);
    if (in_l && in_r) g.cells_mutual.push_back(c);
  }
  for (auto* v : {&g.cells_L, &g.cells_R, &g.cells_union, &g.cells_mutual}) std::sort(v->begin(), v->end());
  return g;
}

}  // namespace handover
