#pragma once
/**
 * @file env.hpp
 * Goal-conditioned episodic environment for the hand-over task.
 *
 * Two action encodings are supported:
 *  - Architecture A: (robot, alpha, beta). The policy only chooses drop-offs in
 *    the mutual space; after every drop an external check places the object
 *    at the goal if either robot achieves the goal yaw within epsilon.
 *  - Architecture B: (final, robot, alpha, beta). The policy also decides when
 *    and with which robot to place the object at the goal.
 *
 * Rewards are sparse. A: 0 on success, -1 otherwise. B: +20 on success, -1 for
 * a drop into the mutual space, -30 for a wrong yaw at the goal or for a robot
 * asked to pick or drop outside its annulus.
 */

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "handover/geometry.hpp"
#include "handover/kinematics.hpp"
#include "handover/random.hpp"
#include "handover/types.hpp"

namespace handover {

enum class Architecture { A, B };

inline std::string_view to_string(Architecture a) { return a == Architecture::A ? "A" : "B"; }

inline Architecture architecture_from_string(std::string_view s) {
  if (s == "A" || s == "a") return Architecture::A;
  if (s == "B" || s == "b") return Architecture::B;
  throw DomainError("unknown architecture '" + std::string(s) + "'");
}

enum class Termination { Step, Success, WrongOrientationAtGoal, InfeasibleRobot, MaxSteps };

inline constexpr std::array<Termination, 5> kTerminations{
    Termination::Step, Termination::Success, Termination::WrongOrientationAtGoal, Termination::InfeasibleRobot,
    Termination::MaxSteps};

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Step: return "step";
    case Termination::Success: return "success";
    case Termination::WrongOrientationAtGoal: return "wrong_orientation_at_goal";
    case Termination::InfeasibleRobot: return "infeasible_robot";
    case Termination::MaxSteps: return "max_steps";
  }
  return "step";
}

inline Termination termination_from_string(std::string_view s) {
  for (Termination t : kTerminations) {
    if (to_string(t) == s) return t;
  }
  throw DomainError("unknown termination reason '" + std::string(s) + "'");
}

struct EpisodeConfig {
  Architecture architecture{Architecture::B};
  double epsilon{0.1};
  int max_steps{20};
  double reward_success{20.0};   ///< architecture B, goal reached
  double reward_step{-1.0};
  double reward_fail{-30.0};     ///< architecture B, wrong yaw or infeasible robot
  double reward_success_a{0.0};  ///< architecture A, goal reached

  void validate() const {
    if (!(epsilon > 0.0)) throw InvalidConfig("episode: epsilon must be positive");
    if (max_steps < 1) throw InvalidConfig("episode: max_steps must be at least 1");
  }
};

/// Tolerance schedule for staged training, loosest stage first.
struct CurriculumSchedule {
  std::vector<double> stages{0.3, 0.1};

  [[nodiscard]] double epsilon(std::size_t stage) const {
    if (stage >= stages.size()) throw DomainError("curriculum: stage out of range");
    return stages[stage];
  }

  void validate() const {
    if (stages.empty()) throw InvalidConfig("curriculum: no stages");
    for (std::size_t i = 0; i < stages.size(); ++i) {
      if (!(stages[i] > 0.0)) throw InvalidConfig("curriculum: tolerances must be positive");
      if (i > 0 && !(stages[i] < stages[i - 1])) throw InvalidConfig("curriculum: tolerances must decrease");
    }
  }
};

inline double curriculum_eps(std::size_t stage, const CurriculumSchedule& schedule = {}) {
  return schedule.epsilon(stage);
}

/// Object pose, goal pose and the robot that moved the object last.
struct AugmentedState {
  ObjectState current;
  ObjectState goal;
  std::optional<RobotId> prev_robot;

  friend bool operator==(const AugmentedState&, const AugmentedState&) = default;
};

/// Observation code of the previous robot: 0 none, -1 L, +1 R.
inline double robot_code(std::optional<RobotId> r) {
  if (!r) return 0.0;
  return *r == RobotId::L ? -1.0 : 1.0;
}

inline std::optional<RobotId> robot_from_code(double code) {
  if (code == 0.0) return std::nullopt;
  if (code == -1.0) return RobotId::L;
  if (code == 1.0) return RobotId::R;
  throw DomainError("invalid robot code");
}

/// (x, y, theta, x_g, y_g, theta_g, previous robot code).
inline std::array<double, 7> observation(const AugmentedState& s) {
  return {s.current.x, s.current.y, s.current.theta, s.goal.x, s.goal.y, s.goal.theta, robot_code(s.prev_robot)};
}

struct ActionA {
  RobotId b{RobotId::L};
  double alpha{0.0};
  double beta{0.0};

  friend bool operator==(const ActionA&, const ActionA&) = default;
};

struct ActionB {
  bool f{false};
  RobotId b{RobotId::L};
  double alpha{0.0};
  double beta{0.0};

  friend bool operator==(const ActionB&, const ActionB&) = default;
};

using Action = std::variant<ActionA, ActionB>;

struct Transition {
  int step{0};  ///< zero-based index of the step within its episode
  AugmentedState state;
  Action action;
  double reward{0.0};
  AugmentedState next_state;
  bool done{false};
  Termination reason{Termination::Step};

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct EpisodeTrace {
  Architecture architecture{Architecture::B};
  std::vector<Transition> transitions;
};

namespace detail {

inline void check_param(double alpha, double beta) {
  if (!(alpha >= -1.0 && alpha <= 1.0 && beta >= -1.0 && beta <= 1.0))
    throw DomainError("action: alpha and beta must lie in [-1, 1]");
}

inline void check_step_index(int step, const EpisodeConfig& cfg) {
  if (step < 0 || step >= cfg.max_steps) throw DomainError("step index outside [0, max_steps)");
}

/// Reason for a non-terminal step at index `step`.
inline Termination continue_or_cap(int step, const EpisodeConfig& cfg) {
  return step + 1 >= cfg.max_steps ? Termination::MaxSteps : Termination::Step;
}

}  // namespace detail

/// Yaw the object ends with when `robot` carries it from the current position
/// to the goal position.
inline double placed_yaw(const Workspace& ws, RobotId robot, const ObjectState& current, Point target) {
  return wrap_angle(current.theta + delta_theta(ws.robot(robot), current.position(), target));
}

/// First robot (L before R) that can carry the object from its current
/// position to the goal with final yaw within epsilon of the goal yaw.
inline std::optional<RobotId> goal_check(const Workspace& ws, const AugmentedState& state, double epsilon) {
  const Point from = state.current.position();
  const Point to = state.goal.position();
  for (RobotId b : kRobots) {
    if (!ws.contains(b, from, kBoundaryTolerance) || !ws.contains(b, to, kBoundaryTolerance)) continue;
    const double yaw = placed_yaw(ws, b, state.current, to);
    if (std::abs(wrap_angle(yaw - state.goal.theta)) <= epsilon) return b;
  }
  return std::nullopt;
}

/// Architecture A transition for the `step`-th action of an episode.
inline Transition step_a(const Workspace& ws, const EpisodeConfig& cfg, const AugmentedState& state,
                         const ActionA& a, int step) {
  detail::check_param(a.alpha, a.beta);
  detail::check_step_index(step, cfg);

  Transition t;
  t.step = step;
  t.state = state;
  t.action = a;

  const Point pick = state.current.position();
  if (!ws.contains(a.b, pick, kBoundaryTolerance)) {
    // The queried robot cannot pick the object: a wasted step.
    t.next_state = state;
    t.reward = cfg.reward_step;
    t.reason = detail::continue_or_cap(step, cfg);
    t.done = t.reason != Termination::Step;
    return t;
  }

  const Point drop = ws.param_to_point(a.alpha, a.beta);
  AugmentedState next = state;
  next.current = {drop.x, drop.y, placed_yaw(ws, a.b, state.current, drop)};
  next.prev_robot = a.b;

  if (const auto finisher = goal_check(ws, next, cfg.epsilon)) {
    next.current = {state.goal.x, state.goal.y, placed_yaw(ws, *finisher, next.current, state.goal.position())};
    next.prev_robot = *finisher;
    t.next_state = next;
    t.reward = cfg.reward_success_a;
    t.reason = Termination::Success;
    t.done = true;
    return t;
  }

  t.next_state = next;
  t.reward = cfg.reward_step;
  t.reason = detail::continue_or_cap(step, cfg);
  t.done = t.reason != Termination::Step;
  return t;
}

/// Architecture B transition for the `step`-th action of an episode.
inline Transition step_b(const Workspace& ws, const EpisodeConfig& cfg, const AugmentedState& state,
                         const ActionB& a, int step) {
  detail::check_param(a.alpha, a.beta);
  detail::check_step_index(step, cfg);

  Transition t;
  t.step = step;
  t.state = state;
  t.action = a;

  const Point pick = state.current.position();
  const Point drop = a.f ? state.goal.position() : ws.param_to_point(a.alpha, a.beta);

  if (!ws.contains(a.b, pick, kBoundaryTolerance) || !ws.contains(a.b, drop, kBoundaryTolerance)) {
    t.next_state = state;
    t.reward = cfg.reward_fail;
    t.reason = Termination::InfeasibleRobot;
    t.done = true;
    return t;
  }

  AugmentedState next = state;
  next.current = {drop.x, drop.y, placed_yaw(ws, a.b, state.current, drop)};
  next.prev_robot = a.b;
  t.next_state = next;

  if (drop == state.goal.position()) {
    const bool on_target = std::abs(wrap_angle(next.current.theta - state.goal.theta)) <= cfg.epsilon;
    t.reward = on_target ? cfg.reward_success : cfg.reward_fail;
    t.reason = on_target ? Termination::Success : Termination::WrongOrientationAtGoal;
    t.done = true;
    return t;
  }

  t.reward = cfg.reward_step;
  t.reason = detail::continue_or_cap(step, cfg);
  t.done = t.reason != Termination::Step;
  return t;
}

/// Dispatches on the action type; the action must match cfg.architecture.
inline Transition step(const Workspace& ws, const EpisodeConfig& cfg, const AugmentedState& state,
                       const Action& action, int step_index) {
  if (cfg.architecture == Architecture::A) {
    const auto* a = std::get_if<ActionA>(&action);
    if (!a) throw DomainError("architecture A expects a (robot, alpha, beta) action");
    return step_a(ws, cfg, state, *a, step_index);
  }
  const auto* b = std::get_if<ActionB>(&action);
  if (!b) throw DomainError("architecture B expects a (final, robot, alpha, beta) action");
  return step_b(ws, cfg, state, *b, step_index);
}

/// Stateful episode runner around the pure transition functions. One caller
/// at a time; independent instances may run concurrently.
class Environment {
 public:
  Environment(WorkspaceConfig workspace, EpisodeConfig episode, std::uint64_t seed = 0)
      : ws_(std::move(workspace)), cfg_(episode), rng_(seed) {
    cfg_.validate();
  }
  Environment(Workspace workspace, EpisodeConfig episode, std::uint64_t seed = 0)
      : ws_(std::move(workspace)), cfg_(episode), rng_(seed) {
    cfg_.validate();
  }

  [[nodiscard]] const Workspace& workspace() const { return ws_; }
  [[nodiscard]] const EpisodeConfig& config() const { return cfg_; }
  [[nodiscard]] const AugmentedState& state() const { return state_; }
  [[nodiscard]] const EpisodeTrace& trace() const { return trace_; }
  [[nodiscard]] int steps() const { return steps_; }
  [[nodiscard]] bool done() const { return done_; }
  [[nodiscard]] bool started() const { return started_; }

  void set_epsilon(double epsilon) {
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    cfg_.epsilon = epsilon;
  }

  /// Starts an episode. A seed reseeds the random stream; missing start or
  /// goal poses are sampled from the union region (start first).
  const AugmentedState& reset(std::optional<std::uint64_t> seed = std::nullopt,
                              std::optional<ObjectState> start = std::nullopt,
                              std::optional<ObjectState> goal = std::nullopt) {
    for (const auto* s : {&start, &goal}) {
      if (*s && !ws_.union_contains((*s)->position(), kBoundaryTolerance))
        throw DomainError("reset: pose outside the manipulation space");
      if (*s && !std::isfinite((*s)->theta)) throw DomainError("reset: non-finite yaw");
    }
    if (seed) rng_.seed(*seed);
    ObjectState s0 = start ? *start : ws_.sample_state(rng_);
    ObjectState g = goal ? *goal : ws_.sample_state(rng_);
    s0.theta = wrap_angle(s0.theta);
    g.theta = wrap_angle(g.theta);
    state_ = {s0, g, std::nullopt};
    steps_ = 0;
    done_ = false;
    started_ = true;
    trace_ = {cfg_.architecture, {}};
    return state_;
  }

  Transition step(const Action& action) {
    if (!started_) throw DomainError("episode not started");
    if (done_) throw DomainError("episode finished");
    Transition t = handover::step(ws_, cfg_, state_, action, steps_);
    state_ = t.next_state;
    ++steps_;
    done_ = t.done;
    trace_.transitions.push_back(t);
    return t;
  }

 private:
  Workspace ws_;
  EpisodeConfig cfg_;
  Rng rng_;
  AugmentedState state_{};
  int steps_{0};
  bool done_{false};
  bool started_{false};
  EpisodeTrace trace_{};
};

}  // namespace handover
