#include <gtest/gtest.h>

#include <sstream>

#include "handover/serialization.hpp"

using namespace handover;

namespace {

const Workspace kWs{};

EpisodeTrace sample_episode(Architecture arch, std::uint64_t seed) {
  EpisodeConfig cfg;
  cfg.architecture = arch;
  Environment env(kWs, cfg);
  env.reset(seed);
  Rng rng(seed);
  while (!env.done()) {
    const RobotId b = uniform01(rng) < 0.5 ? RobotId::L : RobotId::R;
    if (arch == Architecture::A) env.step(ActionA{b, uniform(rng, -1, 1), uniform(rng, -1, 1)});
    else env.step(ActionB{uniform01(rng) < 0.2, b, uniform(rng, -1, 1), uniform(rng, -1, 1)});
  }
  return env.trace();
}

}  // namespace

TEST(TraceJsonl, RoundTripIsExact) {
  for (Architecture arch : {Architecture::A, Architecture::B}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const EpisodeTrace t = sample_episode(arch, seed);
      std::stringstream ss;
      write_trace_jsonl(ss, t);
      const EpisodeTrace back = read_trace_jsonl(ss);
      EXPECT_EQ(back.architecture, arch);
      EXPECT_EQ(back.transitions, t.transitions);
    }
  }
}

TEST(TraceJsonl, OneRecordPerLine) {
  const EpisodeTrace t = sample_episode(Architecture::B, 3);
  std::stringstream ss;
  write_trace_jsonl(ss, t);
  std::string line;
  std::size_t n = 0;
  while (std::getline(ss, line)) {
    const json j = json::parse(line);
    EXPECT_TRUE(j.contains("state"));
    EXPECT_TRUE(j.contains("next_state"));
    EXPECT_TRUE(j.contains("reason"));
    ++n;
  }
  EXPECT_EQ(n, t.transitions.size());
}

TEST(TraceJsonl, RejectsMixedArchitectures) {
  std::stringstream ss;
  write_trace_jsonl(ss, sample_episode(Architecture::A, 1));
  write_trace_jsonl(ss, sample_episode(Architecture::B, 1));
  EXPECT_THROW(read_trace_jsonl(ss), DomainError);
}

TEST(PlanDump, RoundTrip) {
  Plan p;
  p.actions = {{false, RobotId::L, 0.123456789012345, -0.5}, {true, RobotId::R, 0, 0}};
  p.predicted_states = {{1.5, -2.25, 0.1}, {100, 25, 0.58800000000000001}};
  std::stringstream ss;
  write_plan(ss, {0, 25, 0}, {100, 25, 0.588}, 0.1, p);
  const std::string text = ss.str();
  EXPECT_NE(text.find("f,b,alpha,beta,x,y,theta\n"), std::string::npos);
  const PlanFile back = read_plan(ss);
  EXPECT_EQ(back.start, (ObjectState{0, 25, 0}));
  EXPECT_EQ(back.goal, (ObjectState{100, 25, 0.588}));
  EXPECT_EQ(back.epsilon, 0.1);
  ASSERT_EQ(back.plan.actions.size(), 2u);
  EXPECT_EQ(back.plan.actions[0], p.actions[0]);
  EXPECT_EQ(back.plan.actions[1], p.actions[1]);
  EXPECT_EQ(back.plan.predicted_states, p.predicted_states);

  std::stringstream bad("f,b,alpha,beta\n1,L,0\n");
  EXPECT_THROW(read_plan(bad), DomainError);
}

TEST(TrajectoryJson, RoundTrip) {
  const SplineTrajectory t =
      SplineTrajectory::straight(3, 5, JointVector{{0.1, 0.2, -0.3, 0, 0}}, JointVector{{-0.4, 0.5, 0.6, 0.1, 0}});
  const json j = to_json(t);
  EXPECT_EQ(j["degree"], 5);
  EXPECT_EQ(j["control_points"].size(), 7u);
  const SplineTrajectory back = trajectory_from_json(json::parse(j.dump()));
  EXPECT_EQ(back.knots, t.knots);
  EXPECT_EQ(back.control, t.control);
  json broken = j;
  broken["control_points"].erase(0);
  EXPECT_THROW(trajectory_from_json(broken), DomainError);
}
