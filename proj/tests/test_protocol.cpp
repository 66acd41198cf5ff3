#include <gtest/gtest.h>

#include "golden_trace.hpp"
#include "handover/protocol.hpp"

using namespace handover;

namespace {

SessionMessage msg(MessageKind k, json payload = json::object()) { return {k, "t", std::move(payload)}; }

}  // namespace

TEST(Wire, RoundTripAllKinds) {
  Rng rng(4);
  for (MessageKind k : kMessageKinds) {
    for (int n = 0; n < 20; ++n) {
      SessionMessage m{k, "s" + std::to_string(n),
                       {{"x", uniform(rng, -1e3, 1e3)}, {"v", {uniform01(rng), -uniform01(rng)}}, {"n", n}}};
      const std::string line = serialize(m);
      EXPECT_EQ(line.find('\n'), std::string::npos);
      EXPECT_EQ(parse_message(line), m);
    }
    EXPECT_EQ(message_kind_from_string(to_string(k)), k);
  }
}

TEST(Wire, RejectsMalformed) {
  for (const char* bad : {"", "[]", "{", "42", R"({"session":"a"})", R"({"kind":"nope"})", R"({"kind":3})",
                          R"({"kind":"step","session":1})", R"({"kind":"step","payload":[1]})"})
    EXPECT_THROW(parse_message(bad), DomainError) << bad;
  const SessionMessage m = parse_message(R"({"kind":"hello"})");
  EXPECT_EQ(m.kind, MessageKind::Hello);
  EXPECT_TRUE(m.session.empty());
  EXPECT_TRUE(m.payload.is_object());
}

TEST(Actions, SymmetricDecoding) {
  EXPECT_EQ(decode_action(json::array({1.0, -1.0, 0.25, -0.5}), Architecture::B, ActionRange::Symmetric),
            Action(ActionB{true, RobotId::L, 0.25, -0.5}));
  EXPECT_EQ(decode_action(json::array({-0.1, 0.3, 0.0, 1.0}), Architecture::B, ActionRange::Symmetric),
            Action(ActionB{false, RobotId::R, 0.0, 1.0}));
  EXPECT_EQ(decode_action(json::array({0.0, -1.0, 1.0}), Architecture::A, ActionRange::Symmetric),
            Action(ActionA{RobotId::R, -1.0, 1.0}));
  EXPECT_THROW(decode_action(json::array({0, 0, 0}), Architecture::B, ActionRange::Symmetric), DomainError);
  EXPECT_THROW(decode_action(json::array({0, 0, 1.5, 0}), Architecture::B, ActionRange::Symmetric), DomainError);
  EXPECT_THROW(decode_action(json::array({0, "L", 0, 0}), Architecture::B, ActionRange::Symmetric), DomainError);
  EXPECT_THROW(decode_action(json::object(), Architecture::A, ActionRange::Symmetric), DomainError);
}

TEST(Actions, UnitDecoding) {
  EXPECT_EQ(decode_action(json::array({0.75, 0.25, 0.0, 1.0}), Architecture::B, ActionRange::Unit),
            Action(ActionB{true, RobotId::L, -1.0, 1.0}));
  EXPECT_EQ(decode_action(json::array({0.5, 0.5, 0.5, 0.75}), Architecture::B, ActionRange::Unit),
            Action(ActionB{false, RobotId::R, 0.0, 0.5}));
  EXPECT_THROW(decode_action(json::array({-0.5, 0, 0}), Architecture::A, ActionRange::Unit), DomainError);
}

TEST(Actions, EncodeDecodeRoundTrip) {
  Rng rng(8);
  for (int n = 0; n < 1000; ++n) {
    const RobotId b = uniform01(rng) < 0.5 ? RobotId::L : RobotId::R;
    const Action a = ActionB{uniform01(rng) < 0.5, b, uniform(rng, -1, 1), uniform(rng, -1, 1)};
    EXPECT_EQ(decode_action(json::parse(encode_action(a).dump()), Architecture::B, ActionRange::Symmetric), a);
    const Action c = ActionA{b, uniform(rng, -1, 1), uniform(rng, -1, 1)};
    EXPECT_EQ(decode_action(encode_action(c), Architecture::A, ActionRange::Symmetric), c);
  }
}

TEST(Session, HelloReturnsSpec) {
  Session s("t", AppConfig{});
  const SessionMessage r = s.handle(msg(MessageKind::Hello));
  ASSERT_EQ(r.kind, MessageKind::Spec);
  EXPECT_EQ(r.session, "t");
  EXPECT_EQ(r.payload["architecture"], "B");
  EXPECT_EQ(r.payload["action_dim"], 4);
  EXPECT_EQ(r.payload["action_low"], json::array({-1.0, -1.0, -1.0, -1.0}));
  EXPECT_EQ(r.payload["action_high"], json::array({1.0, 1.0, 1.0, 1.0}));
  EXPECT_EQ(r.payload["observation_dim"], 7);
  EXPECT_EQ(r.payload["epsilon"], 0.1);
  EXPECT_EQ(r.payload["max_steps"], 20);
  EXPECT_EQ(r.payload["rewards"]["success_b"], 20.0);
  EXPECT_EQ(r.payload["rewards"]["fail"], -30.0);

  const SessionMessage u = s.handle(msg(MessageKind::Hello, {{"action_range", "unit"}, {"architecture", "A"}}));
  EXPECT_EQ(u.payload["architecture"], "A");
  EXPECT_EQ(u.payload["action_dim"], 3);
  EXPECT_EQ(u.payload["action_low"], json::array({0.0, 0.0, 0.0}));
  EXPECT_EQ(s.environment().config().architecture, Architecture::A);

  const SessionMessage bad = s.handle(msg(MessageKind::Hello, {{"action_range", "wide"}}));
  EXPECT_EQ(bad.kind, MessageKind::Error);
}

TEST(Session, SeededResetIsReproducible) {
  Session a("t", AppConfig{});
  Session b("t", AppConfig{});
  const std::string req = serialize(msg(MessageKind::Reset, {{"seed", 7}}));
  const std::string ra = a.handle_line(req);
  EXPECT_EQ(ra, b.handle_line(req));
  const SessionMessage m = parse_message(ra);
  ASSERT_EQ(m.kind, MessageKind::Observation);
  EXPECT_EQ(m.payload["obs"].size(), 7u);
  EXPECT_EQ(m.payload["obs"][6], 0.0);
}

TEST(Session, ResetWithPosesAndStage) {
  Session s("t", AppConfig{});
  const SessionMessage r =
      s.handle(msg(MessageKind::Reset, {{"start", {0, 25, 0}}, {"goal", {100, 25, 0.588}}, {"stage", 0}}));
  ASSERT_EQ(r.kind, MessageKind::Observation);
  EXPECT_EQ(r.payload["obs"], json::array({0.0, 25.0, 0.0, 100.0, 25.0, 0.588, 0.0}));
  EXPECT_EQ(r.payload["epsilon"], 0.3);
  const SessionMessage out = s.handle(msg(MessageKind::Reset, {{"start", {300, 0, 0}}}));
  EXPECT_EQ(out.kind, MessageKind::Error);
}

TEST(Session, StepLifecycle) {
  Session s("t", AppConfig{});
  SessionMessage r = s.handle(msg(MessageKind::Step, {{"action", {1, -1, 0, 0}}}));
  ASSERT_EQ(r.kind, MessageKind::Error);
  EXPECT_EQ(r.payload["message"], "no active episode; send reset first");

  s.handle(msg(MessageKind::Reset, {{"start", {0, 25, 0}}, {"goal", {100, 25, 2.0}}}));
  r = s.handle(msg(MessageKind::Step));
  EXPECT_EQ(r.payload["message"], "step requires an action");
  r = s.handle(msg(MessageKind::Step, {{"action", {1, 2, 0, 0}}}));
  EXPECT_EQ(r.kind, MessageKind::Error);

  // The final drop by L arrives with the wrong yaw for this goal.
  r = s.handle(msg(MessageKind::Step, {{"action", {1, -1, 0, 0}}}));
  ASSERT_EQ(r.kind, MessageKind::Transition);
  EXPECT_TRUE(r.payload["done"]);
  EXPECT_EQ(r.payload["step"], 0);
  EXPECT_EQ(r.payload["reward"], -30.0);

  r = s.handle(msg(MessageKind::Step, {{"action", {1, -1, 0, 0}}}));
  ASSERT_EQ(r.kind, MessageKind::Error);
  EXPECT_EQ(r.payload["message"], "episode finished");
  EXPECT_EQ(s.handle(msg(MessageKind::Reset)).kind, MessageKind::Observation);
}

TEST(Session, MalformedInputKeepsSessionAlive) {
  Session s("t", AppConfig{});
  for (const char* bad : {"garbage", "{\"kind\":\"spec\"}", "{\"kind\":\"reset\",\"payload\":{\"seed\":\"x\"}}"}) {
    const SessionMessage r = parse_message(s.handle_line(bad));
    EXPECT_EQ(r.kind, MessageKind::Error) << bad;
    EXPECT_FALSE(s.closed());
  }
  EXPECT_EQ(parse_message(s.handle_line(serialize(msg(MessageKind::Reset, {{"seed", 1}})))).kind,
            MessageKind::Observation);
  const SessionMessage other = s.handle({MessageKind::Reset, "someone-else", json::object()});
  EXPECT_EQ(other.payload["message"], "session id mismatch");
}

TEST(Session, Close) {
  Session s("t", AppConfig{});
  EXPECT_EQ(s.handle(msg(MessageKind::Close)).kind, MessageKind::Close);
  EXPECT_TRUE(s.closed());
  const SessionMessage r = s.handle(msg(MessageKind::Reset));
  EXPECT_EQ(r.payload["message"], "session closed");
}

TEST(Session, UnitRangeSteps) {
  Session s("t", AppConfig{});
  s.handle(msg(MessageKind::Hello, {{"action_range", "unit"}}));
  s.handle(msg(MessageKind::Reset, {{"start", {0, 25, 0}}, {"goal", {100, 25, 0.588}}}));
  const SessionMessage r = s.handle(msg(MessageKind::Step, {{"action", {0.0, 0.0, 0.5, 0.5}}}));
  ASSERT_EQ(r.kind, MessageKind::Transition);
  EXPECT_EQ(s.environment().trace().transitions.at(0).action, Action(ActionB{false, RobotId::L, 0.0, 0.0}));
}

TEST(Session, GoldenTraceMatchesInProcessEnvironment) {
  for (Architecture arch : {Architecture::B, Architecture::A}) {
    AppConfig cfg;
    cfg.episode.architecture = arch;
    const auto rep = test_support::golden_trace(cfg, 20);
    EXPECT_EQ(rep.episodes, 20);
    EXPECT_GT(rep.transitions, 20);
    EXPECT_TRUE(rep.mismatches.empty()) << rep.mismatches.front();
  }
}
