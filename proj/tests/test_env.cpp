#include <gtest/gtest.h>

#include <cmath>

#include "handover/env.hpp"

using namespace handover;

namespace {

const Workspace kWs{};

EpisodeConfig config(Architecture arch, double eps = 0.1) {
  EpisodeConfig c;
  c.architecture = arch;
  c.epsilon = eps;
  return c;
}

// Brute-force placement: carry the object with each robot and compare yaws.
std::optional<RobotId> brute_goal_check(const AugmentedState& s, double eps) {
  for (RobotId b : {RobotId::L, RobotId::R}) {
    const Point base = kWs.robot(b).base;
    auto reach = [&](Point p) {
      const double r = std::hypot(p.x - base.x, p.y - base.y);
      return r >= 150.0 - 1e-9 && r <= 230.0 + 1e-9;
    };
    if (!reach(s.current.position()) || !reach(s.goal.position())) continue;
    const double grip_from = std::atan2(s.current.y - base.y, s.current.x - base.x);
    const double grip_to = std::atan2(s.goal.y - base.y, s.goal.x - base.x);
    double err = std::fmod(s.current.theta - grip_from + grip_to - s.goal.theta, kTwoPi);
    if (err > kPi) err -= kTwoPi;
    if (err < -kPi) err += kTwoPi;
    if (std::abs(err) <= eps) return b;
  }
  return std::nullopt;
}

}  // namespace

TEST(GoalCheck, Examples) {
  const AugmentedState s{{0, 25, 0}, {100, 25, 0.58800}, std::nullopt};
  EXPECT_EQ(goal_check(kWs, s, 0.1), RobotId::L);

  AugmentedState flipped = s;
  flipped.goal.theta = wrap_angle(0.58800 + kPi);
  EXPECT_EQ(goal_check(kWs, flipped, 0.1), std::nullopt);
  EXPECT_EQ(brute_goal_check(flipped, 0.1), std::nullopt);

  const AugmentedState same{{10, -5, 0.3}, {10, -5, 0.3}, std::nullopt};
  EXPECT_TRUE(goal_check(kWs, same, 0.1).has_value());
}

TEST(GoalCheck, MatchesBruteForce) {
  Rng rng(404);
  int hits = 0;
  for (int k = 0; k < 10000; ++k) {
    const Point c = kWs.param_to_point(uniform(rng, -1, 1), uniform(rng, -1, 1));
    AugmentedState s{{c.x, c.y, uniform_angle(rng)}, kWs.sample_state(rng), std::nullopt};
    const double eps = k % 2 ? 0.1 : 0.3;
    if (k % 3 == 0) {
      // Aim near the achievable yaw so both outcomes are well represented.
      for (RobotId b : kRobots) {
        if (kWs.contains(b, s.goal.position())) {
          s.goal.theta = wrap_angle(placed_yaw(kWs, b, s.current, s.goal.position()) + uniform(rng, -0.4, 0.4));
          break;
        }
      }
    }
    const auto got = goal_check(kWs, s, eps);
    ASSERT_EQ(got, brute_goal_check(s, eps));
    hits += got.has_value();
  }
  EXPECT_GT(hits, 500);
}

TEST(Observation, Layout) {
  AugmentedState s{{1, 2, 0.5}, {3, 4, -0.5}, std::nullopt};
  EXPECT_EQ(observation(s), (std::array<double, 7>{1, 2, 0.5, 3, 4, -0.5, 0}));
  s.prev_robot = RobotId::L;
  EXPECT_EQ(observation(s)[6], -1.0);
  s.prev_robot = RobotId::R;
  EXPECT_EQ(observation(s)[6], 1.0);
  EXPECT_EQ(robot_from_code(-1.0), RobotId::L);
  EXPECT_EQ(robot_from_code(0.0), std::nullopt);
  EXPECT_THROW(robot_from_code(0.5), DomainError);
}

TEST(StepA, SuccessAfterExternalCheck) {
  const EpisodeConfig cfg = config(Architecture::A);
  const AugmentedState s{{0, 25, 0}, {100, 25, 0.58800}, std::nullopt};
  // Dropping where the object already is keeps the check true.
  const Transition t = step_a(kWs, cfg, s, {RobotId::L, 0.0, 1.0}, 0);
  EXPECT_EQ(t.reward, 0.0);
  EXPECT_TRUE(t.done);
  EXPECT_EQ(t.reason, Termination::Success);
  EXPECT_EQ(t.next_state.current.position(), s.goal.position());
  EXPECT_LE(std::abs(wrap_angle(t.next_state.current.theta - s.goal.theta)), 0.1);
  EXPECT_EQ(t.next_state.prev_robot, RobotId::L);
}

TEST(StepA, NonMatchingDropCostsOneStep) {
  const EpisodeConfig cfg = config(Architecture::A);
  const AugmentedState s{{0, 25, 0}, {100, 25, 0.58800 + kPi / 2}, std::nullopt};
  const Transition t = step_a(kWs, cfg, s, {RobotId::L, 0.5, 0.0}, 0);
  EXPECT_EQ(t.reward, -1.0);
  EXPECT_FALSE(t.done);
  EXPECT_EQ(t.reason, Termination::Step);
  const Point drop = kWs.param_to_point(0.5, 0.0);
  EXPECT_EQ(t.next_state.current.position(), drop);
  EXPECT_NEAR(t.next_state.current.theta, delta_theta(kWs.robot(RobotId::L), {0, 25}, drop), 1e-15);
}

TEST(StepA, InfeasibleRobotIsWastedStep) {
  const EpisodeConfig cfg = config(Architecture::A);
  const AugmentedState s{{0, 350, 0.2}, {0, -350, 0.0}, std::nullopt};  // only L reaches the start
  const Transition t = step_a(kWs, cfg, s, {RobotId::R, 0.0, 0.0}, 3);
  EXPECT_EQ(t.reward, -1.0);
  EXPECT_EQ(t.next_state, s);
  EXPECT_FALSE(t.done);
  EXPECT_EQ(t.reason, Termination::Step);
}

TEST(StepA, TwentiethStepHitsMaxSteps) {
  const EpisodeConfig cfg = config(Architecture::A);
  const AugmentedState s{{0, 350, 0.2}, {0, -350, 0.0}, std::nullopt};
  const Transition t = step_a(kWs, cfg, s, {RobotId::L, 0.0, 0.0}, 19);
  EXPECT_EQ(t.reward, -1.0);
  EXPECT_TRUE(t.done);
  EXPECT_EQ(t.reason, Termination::MaxSteps);
  EXPECT_THROW(step_a(kWs, cfg, s, {RobotId::L, 0.0, 0.0}, 20), DomainError);
  EXPECT_THROW(step_a(kWs, cfg, s, {RobotId::L, 1.5, 0.0}, 0), DomainError);
}

TEST(StepB, RewardTable) {
  const EpisodeConfig cfg = config(Architecture::B);
  const AugmentedState s{{0, 25, 0}, {100, 25, 0.58800}, std::nullopt};

  const Transition win = step_b(kWs, cfg, s, {true, RobotId::L, 0.3, -0.7}, 0);
  EXPECT_EQ(win.reward, 20.0);
  EXPECT_EQ(win.reason, Termination::Success);
  EXPECT_TRUE(win.done);
  EXPECT_EQ(win.next_state.current.position(), s.goal.position());

  AugmentedState off = s;
  off.goal.theta = 2.0;
  const Transition wrong = step_b(kWs, cfg, off, {true, RobotId::L, 0, 0}, 0);
  EXPECT_EQ(wrong.reward, -30.0);
  EXPECT_EQ(wrong.reason, Termination::WrongOrientationAtGoal);
  EXPECT_TRUE(wrong.done);

  const AugmentedState far{{0, 25, 0}, {0, 350, 0}, std::nullopt};  // goal only reachable by L
  const Transition bad_goal = step_b(kWs, cfg, far, {true, RobotId::R, 0, 0}, 0);
  EXPECT_EQ(bad_goal.reward, -30.0);
  EXPECT_EQ(bad_goal.reason, Termination::InfeasibleRobot);
  EXPECT_EQ(bad_goal.next_state, far);

  const AugmentedState stranded{{0, -350, 0}, {0, 0, 0}, std::nullopt};  // start only reachable by R
  const Transition bad_pick = step_b(kWs, cfg, stranded, {false, RobotId::L, 0, 0}, 0);
  EXPECT_EQ(bad_pick.reward, -30.0);
  EXPECT_EQ(bad_pick.reason, Termination::InfeasibleRobot);

  const Transition move = step_b(kWs, cfg, s, {false, RobotId::R, -0.4, 0.6}, 0);
  EXPECT_EQ(move.reward, -1.0);
  EXPECT_FALSE(move.done);
  EXPECT_EQ(move.reason, Termination::Step);
  EXPECT_TRUE(kWs.mutual_contains(move.next_state.current.position(), 1e-9));
  EXPECT_EQ(move.next_state.prev_robot, RobotId::R);

  const Transition capped = step_b(kWs, cfg, s, {false, RobotId::R, -0.4, 0.6}, 19);
  EXPECT_EQ(capped.reason, Termination::MaxSteps);
  EXPECT_TRUE(capped.done);
}

TEST(StepB, FinalActionIgnoresParameters) {
  const EpisodeConfig cfg = config(Architecture::B);
  const AugmentedState s{{0, 25, 0}, {100, 25, 0.58800}, std::nullopt};
  const Transition a = step_b(kWs, cfg, s, {true, RobotId::L, -1, -1}, 2);
  const Transition b = step_b(kWs, cfg, s, {true, RobotId::L, 1, 1}, 2);
  EXPECT_EQ(a.next_state, b.next_state);
  EXPECT_EQ(a.reward, b.reward);
}

TEST(Step, DispatchAndDeterminism) {
  const AugmentedState s{{0, 25, 0}, {100, 25, 0.58800}, std::nullopt};
  EXPECT_THROW(step(kWs, config(Architecture::A), s, ActionB{}, 0), DomainError);
  EXPECT_THROW(step(kWs, config(Architecture::B), s, ActionA{}, 0), DomainError);
  Rng rng(8);
  for (int k = 0; k < 1000; ++k) {
    const Point c = kWs.param_to_point(uniform(rng, -1, 1), uniform(rng, -1, 1));
    const AugmentedState st{{c.x, c.y, uniform_angle(rng)}, kWs.sample_state(rng), RobotId::L};
    const ActionB a{uniform01(rng) < 0.3, uniform01(rng) < 0.5 ? RobotId::L : RobotId::R, uniform(rng, -1, 1),
                    uniform(rng, -1, 1)};
    const Transition t1 = step(kWs, config(Architecture::B), st, a, 4);
    const Transition t2 = step(kWs, config(Architecture::B), st, a, 4);
    EXPECT_EQ(t1, t2);
    EXPECT_EQ(t1.done, t1.reason != Termination::Step);
    // The next position does not depend on the current yaw.
    AugmentedState turned = st;
    turned.current.theta = wrap_angle(st.current.theta + 1.0);
    EXPECT_EQ(step(kWs, config(Architecture::B), turned, a, 4).next_state.current.position(),
              t1.next_state.current.position());
  }
}

TEST(Environment, ResetDeterminismAndValidation) {
  Environment a(WorkspaceConfig{}, config(Architecture::B));
  Environment b(WorkspaceConfig{}, config(Architecture::B));
  EXPECT_EQ(a.reset(42), b.reset(42));
  EXPECT_EQ(a.state().prev_robot, std::nullopt);
  EXPECT_THROW(a.reset(1, ObjectState{0, 0, 0}, ObjectState{500, 0, 0}), DomainError);
  EXPECT_THROW(a.reset(1, ObjectState{0, 175, 0}, std::nullopt), DomainError);

  const AugmentedState s = a.reset(std::nullopt, ObjectState{0, 0, 0}, ObjectState{0, 0, 0});
  const Transition t = a.step(ActionB{true, RobotId::L, 0, 0});
  EXPECT_EQ(t.reason, Termination::Success);
  EXPECT_EQ(s.current, (ObjectState{0, 0, 0}));
  EXPECT_THROW(a.step(ActionB{true, RobotId::L, 0, 0}), DomainError);
  Environment c(WorkspaceConfig{}, config(Architecture::B));
  EXPECT_THROW(c.step(ActionB{}), DomainError);
}

TEST(Environment, EpisodeLengthNeverExceedsCap) {
  Environment env(WorkspaceConfig{}, config(Architecture::A));
  Rng rng(12);
  for (int e = 0; e < 50; ++e) {
    env.reset(static_cast<std::uint64_t>(e));
    while (!env.done())
      env.step(ActionA{uniform01(rng) < 0.5 ? RobotId::L : RobotId::R, uniform(rng, -1, 1), uniform(rng, -1, 1)});
    EXPECT_LE(env.steps(), 20);
    EXPECT_EQ(env.trace().transitions.size(), static_cast<std::size_t>(env.steps()));
  }
}

TEST(Curriculum, Schedule) {
  EXPECT_EQ(curriculum_eps(0), 0.3);
  EXPECT_EQ(curriculum_eps(1), 0.1);
  EXPECT_THROW(curriculum_eps(2), DomainError);
  const CurriculumSchedule s;
  EXPECT_NO_THROW(s.validate());
  EXPECT_GT(s.stages[0], s.stages[1]);
  EXPECT_THROW((CurriculumSchedule{{0.1, 0.3}}).validate(), InvalidConfig);
  EXPECT_THROW((CurriculumSchedule{{}}).validate(), InvalidConfig);
}

TEST(EpisodeConfig, Validation) {
  EpisodeConfig c;
  EXPECT_EQ(c.reward_success, 20.0);
  EXPECT_EQ(c.reward_step, -1.0);
  EXPECT_EQ(c.reward_fail, -30.0);
  EXPECT_EQ(c.max_steps, 20);
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), InvalidConfig);
  c.epsilon = 0.1;
  c.max_steps = 0;
  EXPECT_THROW(c.validate(), InvalidConfig);
}
