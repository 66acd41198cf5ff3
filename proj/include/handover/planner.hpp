#pragma once
/**
 * @file planner.hpp
 * Minimum-step hand-over planner.
 *
 * Every leg carried by robot b from p to q turns the object by
 * az_b(q) - az_b(p), where az_b is the azimuth from b's base. Consecutive legs
 * by the same robot telescope, so useful plans alternate robots and the total
 * turn depends on the hand-over points only through
 *   G(h) = az_b(h) - az_b'(h)   (b hands over to b' at h).
 * G is harmonic on the mutual space, so its range is attained on the boundary.
 *
 * Search runs in two phases:
 *  - coarse: breadth-first search over (hand-over cell, yaw bin, last robot)
 *    nodes; a node terminates the search when the goal is reachable from it
 *    either directly within epsilon or through one more hand-over whose
 *    required G value lies in G's range;
 *  - refine: bisection along the boundary loop of the mutual space finds the
 *    final hand-over point that hits the goal yaw.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_set>
#include <vector>

#include "handover/env.hpp"
#include "handover/geometry.hpp"
#include "handover/kinematics.hpp"

namespace handover {

struct Plan {
  std::vector<ActionB> actions;
  std::vector<ObjectState> predicted_states;  ///< object pose after each action
};

struct PlanResult {
  bool success{false};
  Plan plan;              ///< best plan found; empty when nothing was found
  double residual{kPi};   ///< |wrap(final yaw - goal yaw)| of `plan`
};

struct PlannerOptions {
  double handover_pitch{10.0};  ///< lattice pitch of candidate hand-over points (mm)
  double theta_bin{0.05};       ///< yaw bin width used to merge search nodes (rad)
  int boundary_samples{720};    ///< samples of the mutual-space boundary loop
  int bisection_iterations{80};
  std::size_t max_nodes_per_level{400000};

  void validate() const {
    if (!(handover_pitch > 0.0 && theta_bin > 0.0)) throw InvalidConfig("planner: discretization must be positive");
    if (boundary_samples < 8) throw InvalidConfig("planner: too few boundary samples");
    if (bisection_iterations < 1) throw InvalidConfig("planner: bisection_iterations must be positive");
  }
};

/// Angle interval [lo, hi] on the unwrapped line; hi - lo < 2 pi.
struct AngleInterval {
  double lo{0.0};
  double hi{0.0};

  [[nodiscard]] bool contains(double angle, double tol = 0.0) const {
    const double mid = 0.5 * (lo + hi);
    const double a = mid + wrap_angle(angle - mid);
    return a >= lo - tol && a <= hi + tol;
  }
};

/// One bisection iterate of the hand-over refinement.
struct RefineStep {
  double bracket{0.0};        ///< length of the bracketing arc (loop parameter units)
  double residual{0.0};       ///< |G(mid) - target| at this iterate
  double best_residual{0.0};  ///< smallest residual seen so far
};

struct RefineResult {
  double alpha{0.0};
  double beta{0.0};
  Point point{};
  double residual{kPi};
  std::vector<RefineStep> history;
};

/// Replays a plan through the architecture-B transition function.
struct SimulationResult {
  ObjectState final_state;
  std::vector<Transition> transitions;
  Termination reason{Termination::Step};
};

inline SimulationResult simulate(const Workspace& ws, const EpisodeConfig& cfg, const ObjectState& start,
                                 const ObjectState& goal, const Plan& plan) {
  EpisodeConfig b_cfg = cfg;
  b_cfg.architecture = Architecture::B;
  SimulationResult out;
  AugmentedState s{start, goal, std::nullopt};
  int k = 0;
  for (const ActionB& a : plan.actions) {
    if (!out.transitions.empty() && out.transitions.back().done)
      throw DomainError("simulate: plan continues after the episode terminated");
    out.transitions.push_back(step_b(ws, b_cfg, s, a, k++));
    s = out.transitions.back().next_state;
    out.reason = out.transitions.back().reason;
  }
  out.final_state = s.current;
  return out;
}

class Planner {
 public:
  explicit Planner(Workspace ws, PlannerOptions opts = {}) : ws_(std::move(ws)), opts_(opts) {
    opts_.validate();
    build_handover_cells();
    build_boundary();
  }

  [[nodiscard]] const Workspace& workspace() const { return ws_; }
  [[nodiscard]] const PlannerOptions& options() const { return opts_; }
  [[nodiscard]] std::size_t handover_cell_count() const { return cells_.size(); }

  /// Range of delta_theta(robot, from, p) over the mutual space, evaluated on
  /// the boundary discretization.
  [[nodiscard]] AngleInterval reachable_delta_interval(RobotId robot, Point from) const {
    const RobotSpec& spec = ws_.robot(robot);
    const double az_from = yaw_at(spec, from);
    const int r = index(robot);
    const double base = wrap_angle(boundary_.front().az[r] - az_from);
    AngleInterval iv{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& s : boundary_) {
      const double v = base + (s.az[r] - boundary_.front().az[r]);
      iv.lo = std::min(iv.lo, v);
      iv.hi = std::max(iv.hi, v);
    }
    return iv;
  }

  /// Range of az_giver(h) - az_taker(h) over the mutual space.
  [[nodiscard]] AngleInterval handover_gain_interval(RobotId giver, RobotId taker) const {
    const auto& g = gain_[index(giver)][index(taker)];
    return {g.min, g.max};
  }

  /// Finds a boundary point h with az_giver(h) - az_taker(h) = target (mod 2 pi).
  /// Returns nullopt when the target lies outside the sampled range.
  [[nodiscard]] std::optional<RefineResult> refine_handover(RobotId giver, RobotId taker, double target) const {
    if (giver == taker) return std::nullopt;
    const GainRange& g = gain_[index(giver)][index(taker)];
    const double mid = 0.5 * (g.min + g.max);
    const double t = mid + wrap_angle(target - mid);
    if (t < g.min || t > g.max) return std::nullopt;

    const double loop = 4.0;
    double lo = boundary_[g.arg_min].s;
    double hi = boundary_[g.arg_max].s;
    if (hi < lo) hi += loop;  // walk forward around the loop from argmin to argmax

    auto eval = [&](double s, RefineResult& r) {
      const auto [alpha, beta] = loop_param(std::fmod(s, loop));
      const Point p = ws_.param_to_point(alpha, beta);
      const double v = azimuth(giver, p) - azimuth(taker, p);
      r.alpha = alpha;
      r.beta = beta;
      r.point = p;
      r.residual = std::abs(v - t);
      return v - t;
    };

    RefineResult best;
    RefineResult cur;
    eval(lo, best);
    eval(hi, cur);
    if (cur.residual < best.residual) best = cur;
    std::vector<RefineStep> history;
    for (int it = 0; it < opts_.bisection_iterations && best.residual > 1e-13; ++it) {
      const double m = 0.5 * (lo + hi);
      if (!(m > lo && m < hi)) break;
      if (eval(m, cur) <= 0.0) lo = m; else hi = m;
      if (cur.residual < best.residual) best = cur;
      history.push_back({hi - lo, cur.residual, best.residual});
    }
    best.history = std::move(history);
    return best;
  }

  [[nodiscard]] PlanResult plan(const ObjectState& start, const ObjectState& goal, double epsilon,
                                int max_steps) const {
    if (!ws_.union_contains(start.position(), kBoundaryTolerance) ||
        !ws_.union_contains(goal.position(), kBoundaryTolerance))
      throw DomainError("plan: start and goal must lie in the manipulation space");
    if (!(epsilon > 0.0)) throw DomainError("plan: epsilon must be positive");
    if (max_steps < 1) throw DomainError("plan: max_steps must be at least 1");

    const Point gpos = goal.position();
    std::array<bool, 2> goal_reach{ws_.contains(RobotId::L, gpos, kBoundaryTolerance),
                                   ws_.contains(RobotId::R, gpos, kBoundaryTolerance)};
    std::array<double, 2> goal_az{goal_reach[0] ? azimuth(RobotId::L, gpos) : 0.0,
                                  goal_reach[1] ? azimuth(RobotId::R, gpos) : 0.0};

    std::vector<Node> nodes;
    Node root;
    root.pos = start.position();
    root.theta = wrap_angle(start.theta);
    for (RobotId b : kRobots) {
      root.reach[index(b)] = ws_.contains(b, root.pos, kBoundaryTolerance);
      root.az[index(b)] = root.reach[index(b)] ? azimuth(b, root.pos) : 0.0;
    }
    nodes.push_back(root);

    std::vector<std::size_t> prev_level;  // depth L-2
    std::vector<std::size_t> level{0};    // depth L-1

    PlanResult best_failure;
    for (int length = 1; length <= max_steps; ++length) {
      // One more hand-over, refined onto the boundary, from depth L-2 nodes.
      for (std::size_t id : prev_level) {
        const Node& u = nodes[id];
        for (RobotId giver : kRobots) {
          const int gi = index(giver);
          if (!u.reach[gi] || (u.robot && *u.robot == giver)) continue;
          const RobotId taker = other(giver);
          const int ti = index(taker);
          if (!goal_reach[ti]) continue;
          const double target = goal.theta - u.theta + u.az[gi] - goal_az[ti];
          const auto r = refine_handover(giver, taker, target);
          if (!r) continue;
          Plan p = assemble(nodes, id);
          p.actions.push_back({false, giver, r->alpha, r->beta});
          p.actions.push_back({true, taker, 0.0, 0.0});
          if (auto res = finish(start, goal, epsilon, max_steps, std::move(p))) {
            if (res->success) return *res;
            keep_better(best_failure, *res);
          }
        }
      }

      // Direct final leg from depth L-1 nodes; keep the smallest residual.
      std::optional<std::pair<std::size_t, RobotId>> direct;
      double direct_residual = std::numeric_limits<double>::infinity();
      for (std::size_t id : level) {
        const Node& u = nodes[id];
        for (RobotId b : kRobots) {
          const int bi = index(b);
          if (!u.reach[bi] || !goal_reach[bi]) continue;
          if (u.robot && *u.robot == b) continue;
          const double r = std::abs(wrap_angle(u.theta + goal_az[bi] - u.az[bi] - goal.theta));
          if (r < direct_residual) {
            direct_residual = r;
            direct = {id, b};
          }
        }
      }
      if (direct) {
        Plan p = assemble(nodes, direct->first);
        p.actions.push_back({true, direct->second, 0.0, 0.0});
        if (auto res = finish(start, goal, epsilon, max_steps, std::move(p))) {
          if (res->success) return *res;
          keep_better(best_failure, *res);
        }
      }

      if (length == max_steps) break;
      prev_level = std::move(level);
      level = expand(nodes, prev_level);
      if (level.empty() && prev_level.empty()) break;
    }
    return best_failure;
  }

 private:
  struct HandoverCell {
    double alpha{0.0};
    double beta{0.0};
    Point p{};
    std::array<double, 2> az{};
  };

  struct BoundarySample {
    double s{0.0};
    std::array<double, 2> az{};
  };

  struct GainRange {
    double min{0.0};
    double max{0.0};
    std::size_t arg_min{0};
    std::size_t arg_max{0};
  };

  struct Node {
    Point pos{};
    double theta{0.0};
    std::optional<RobotId> robot;  ///< robot that carried the object here
    std::array<bool, 2> reach{true, true};
    std::array<double, 2> az{};
    int cell{-1};
    std::size_t parent{0};
    int depth{0};
  };

  static int index(RobotId id) { return id == RobotId::L ? 0 : 1; }

  [[nodiscard]] double azimuth(RobotId id, Point p) const {
    const Point base = ws_.robot(id).base;
    return std::atan2(p.y - base.y, p.x - base.x);
  }

  /// Boundary loop of the mutual space: upper edge for s in [0, 2], lower edge
  /// back for s in [2, 4].
  static std::pair<double, double> loop_param(double s) {
    if (s <= 2.0) return {std::clamp(s - 1.0, -1.0, 1.0), 1.0};
    return {std::clamp(3.0 - s, -1.0, 1.0), -1.0};
  }

  void build_handover_cells() {
    const GridApproximation g = ws_.rasterize(opts_.handover_pitch);
    for (const GridCell& c : g.cells_mutual) {
      const auto [alpha, beta] = ws_.point_to_param(c.center(g.pitch));
      const Point p = ws_.param_to_point(alpha, beta);
      if (!ws_.mutual_contains(p)) continue;
      cells_.push_back({alpha, beta, p, {azimuth(RobotId::L, p), azimuth(RobotId::R, p)}});
    }
    if (cells_.empty()) throw InvalidConfig("planner: no hand-over cells at this pitch");
  }

  void build_boundary() {
    const int n = opts_.boundary_samples;
    for (int k = 0; k < n; ++k) {
      const double s = 4.0 * k / n;
      const auto [alpha, beta] = loop_param(s);
      const Point p = ws_.param_to_point(alpha, beta);
      boundary_.push_back({s, {azimuth(RobotId::L, p), azimuth(RobotId::R, p)}});
    }
    for (RobotId giver : kRobots) {
      for (RobotId taker : kRobots) {
        GainRange g{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0, 0};
        for (std::size_t k = 0; k < boundary_.size(); ++k) {
          const double v = boundary_[k].az[index(giver)] - boundary_[k].az[index(taker)];
          if (v < g.min) { g.min = v; g.arg_min = k; }
          if (v > g.max) { g.max = v; g.arg_max = k; }
        }
        gain_[index(giver)][index(taker)] = g;
      }
    }
  }

  [[nodiscard]] std::vector<std::size_t> expand(std::vector<Node>& nodes, const std::vector<std::size_t>& from) const {
    const int bins = static_cast<int>(std::ceil(kTwoPi / opts_.theta_bin));
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::size_t> out;
    for (std::size_t id : from) {
      for (RobotId b : kRobots) {
        const int bi = index(b);
        if (!nodes[id].reach[bi] || (nodes[id].robot && *nodes[id].robot == b)) continue;
        for (std::size_t c = 0; c < cells_.size(); ++c) {
          const Node& u = nodes[id];
          const double theta = wrap_angle(u.theta + cells_[c].az[bi] - u.az[bi]);
          const int bin = std::min(bins - 1, static_cast<int>((theta + kPi) / opts_.theta_bin));
          const std::uint64_t key = (static_cast<std::uint64_t>(c) * bins + bin) * 2 + bi;
          if (!seen.insert(key).second) continue;
          Node v;
          v.pos = cells_[c].p;
          v.theta = theta;
          v.robot = b;
          v.az = cells_[c].az;
          v.cell = static_cast<int>(c);
          v.parent = id;
          v.depth = u.depth + 1;
          nodes.push_back(v);
          out.push_back(nodes.size() - 1);
          if (out.size() >= opts_.max_nodes_per_level) return out;
        }
      }
    }
    return out;
  }

  /// Hand-over actions leading from the root to node `id`.
  [[nodiscard]] Plan assemble(const std::vector<Node>& nodes, std::size_t id) const {
    Plan p;
    std::vector<ActionB> rev;
    while (id != 0) {
      const Node& n = nodes[id];
      const HandoverCell& c = cells_[static_cast<std::size_t>(n.cell)];
      rev.push_back({false, *n.robot, c.alpha, c.beta});
      id = n.parent;
    }
    p.actions.assign(rev.rbegin(), rev.rend());
    return p;
  }

  /// Validates a candidate by simulation and fills in the predicted poses.
  [[nodiscard]] std::optional<PlanResult> finish(const ObjectState& start, const ObjectState& goal, double epsilon,
                                                 int max_steps, Plan p) const {
    if (p.actions.size() > static_cast<std::size_t>(max_steps)) return std::nullopt;
    EpisodeConfig cfg;
    cfg.architecture = Architecture::B;
    cfg.epsilon = epsilon;
    cfg.max_steps = max_steps;
    SimulationResult sim;
    try {
      sim = simulate(ws_, cfg, start, goal, p);
    } catch (const DomainError&) {
      return std::nullopt;
    }
    PlanResult r;
    for (const Transition& t : sim.transitions) p.predicted_states.push_back(t.next_state.current);
    r.success = sim.reason == Termination::Success;
    r.residual = std::abs(wrap_angle(sim.final_state.theta - goal.theta));
    if (sim.reason == Termination::InfeasibleRobot) r.residual = kPi;
    r.plan = std::move(p);
    return r;
  }

  static void keep_better(PlanResult& best, const PlanResult& cand) {
    if (best.plan.actions.empty() || cand.residual < best.residual) best = cand;
  }

  Workspace ws_;
  PlannerOptions opts_;
  std::vector<HandoverCell> cells_;
  std::vector<BoundarySample> boundary_;
  std::array<std::array<GainRange, 2>, 2> gain_{};
};

}  // namespace handover
