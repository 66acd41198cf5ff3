#pragma once
/**
 * @file protocol.hpp
 * Line-delimited JSON session protocol for external learners.
 *
 * Every message is one JSON object on one line:
 *   {"kind": "<kind>", "session": "<id>", "payload": {...}}
 *
 * Client -> server kinds: hello, reset, step, close.
 * Server -> client kinds: spec, observation, transition, close, error.
 *
 *   hello      {"action_range": "symmetric" | "unit", "architecture": "A" | "B"}   (all optional)
 *   spec       action/observation layout, bounds, epsilon, max_steps, rewards
 *   reset      {"seed": n, "start": [x,y,theta], "goal": [x,y,theta], "stage": k}  (all optional)
 *   observation{"obs": [x, y, theta, x_g, y_g, theta_g, prev_robot], "epsilon": e}
 *   step       {"action": [f, b, alpha, beta]} (B) or {"action": [b, alpha, beta]} (A)
 *   transition {"obs": [...], "reward": r, "done": bool, "reason": "...", "step": k}
 *   error      {"message": "..."}
 *
 * Action components use [-1, 1] ("symmetric": f > 0 means final, b < 0 means
 * L) or [0, 1] ("unit": f > 0.5 final, b < 0.5 L, alpha = 2u - 1). The previous
 * robot is encoded 0 (none), -1 (L), +1 (R).
 */

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "handover/config.hpp"
#include "handover/env.hpp"
#include "handover/serialization.hpp"

namespace handover {

enum class MessageKind { Hello, Spec, Reset, Observation, Step, Transition, Close, Error };

inline constexpr std::array<MessageKind, 8> kMessageKinds{
    MessageKind::Hello, MessageKind::Spec,       MessageKind::Reset, MessageKind::Observation,
    MessageKind::Step,  MessageKind::Transition, MessageKind::Close, MessageKind::Error};

inline std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Hello: return "hello";
    case MessageKind::Spec: return "spec";
    case MessageKind::Reset: return "reset";
    case MessageKind::Observation: return "observation";
    case MessageKind::Step: return "step";
    case MessageKind::Transition: return "transition";
    case MessageKind::Close: return "close";
    case MessageKind::Error: return "error";
  }
  return "error";
}

inline MessageKind message_kind_from_string(std::string_view s) {
  for (MessageKind k : kMessageKinds) {
    if (to_string(k) == s) return k;
  }
  throw DomainError("unknown message kind '" + std::string(s) + "'");
}

struct SessionMessage {
  MessageKind kind{MessageKind::Error};
  std::string session;
  json payload = json::object();

  friend bool operator==(const SessionMessage&, const SessionMessage&) = default;
};

inline std::string serialize(const SessionMessage& m) {
  return json{{"kind", to_string(m.kind)}, {"session", m.session}, {"payload", m.payload}}.dump();
}

/// Throws DomainError on anything that is not a well-formed message.
inline SessionMessage parse_message(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DomainError("malformed message: not a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string()) throw DomainError("malformed message: missing kind");
  SessionMessage m;
  m.kind = message_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("session")) {
    if (!j["session"].is_string()) throw DomainError("malformed message: session must be a string");
    m.session = j["session"].get<std::string>();
  }
  if (j.contains("payload")) {
    if (!j["payload"].is_object()) throw DomainError("malformed message: payload must be an object");
    m.payload = j["payload"];
  }
  return m;
}

enum class ActionRange { Symmetric, Unit };

/// Decodes a wire action vector into an in-process action.
inline Action decode_action(const json& v, Architecture arch, ActionRange range) {
  const std::size_t dim = arch == Architecture::A ? 3 : 4;
  if (!v.is_array() || v.size() != dim)
    throw DomainError("action must be an array of " + std::to_string(dim) + " numbers");
  std::array<double, 4> x{};
  for (std::size_t i = 0; i < dim; ++i) {
    if (!v[i].is_number()) throw DomainError("action components must be numbers");
    x[i] = v[i].get<double>();
    const double lo = range == ActionRange::Unit ? 0.0 : -1.0;
    if (!(x[i] >= lo && x[i] <= 1.0)) throw DomainError("action component out of bounds");
  }
  const double mid = range == ActionRange::Unit ? 0.5 : 0.0;
  auto param = [&](double u) { return range == ActionRange::Unit ? 2.0 * u - 1.0 : u; };
  if (arch == Architecture::A) return ActionA{x[0] < mid ? RobotId::L : RobotId::R, param(x[1]), param(x[2])};
  return ActionB{x[0] > mid, x[1] < mid ? RobotId::L : RobotId::R, param(x[2]), param(x[3])};
}

/// Wire encoding of an in-process action in the symmetric range.
inline json encode_action(const Action& a) {
  auto code = [](RobotId b) { return b == RobotId::L ? -1.0 : 1.0; };
  if (const auto* x = std::get_if<ActionA>(&a)) return json::array({code(x->b), x->alpha, x->beta});
  const auto& y = std::get<ActionB>(a);
  return json::array({y.f ? 1.0 : -1.0, code(y.b), y.alpha, y.beta});
}

/// One client's episode state. Messages are handled strictly in order.
class Session {
 public:
  Session(std::string id, AppConfig cfg)
      : id_(std::move(id)), cfg_(std::move(cfg)), env_(std::make_unique<Environment>(cfg_.workspace, cfg_.episode)) {}

  [[nodiscard]] const std::string& id() const { return id_; }
  [[nodiscard]] bool closed() const { return closed_; }
  [[nodiscard]] const Environment& environment() const { return *env_; }

  /// Reply line for one request line. Never throws on malformed input.
  std::string handle_line(std::string_view line) {
    SessionMessage req;
    try {
      req = parse_message(line);
    } catch (const std::exception& e) {
      return serialize(error(e.what()));
    }
    return serialize(handle(req));
  }

  SessionMessage handle(const SessionMessage& req) {
    try {
      if (closed_) return error("session closed");
      if (!req.session.empty() && req.session != id_) return error("session id mismatch");
      switch (req.kind) {
        case MessageKind::Hello: return hello(req.payload);
        case MessageKind::Reset: return reset(req.payload);
        case MessageKind::Step: return step(req.payload);
        case MessageKind::Close:
          closed_ = true;
          return reply(MessageKind::Close, json::object());
        default: return error("unexpected message kind '" + std::string(to_string(req.kind)) + "'");
      }
    } catch (const std::exception& e) {
      return error(e.what());
    }
  }

 private:
  SessionMessage reply(MessageKind kind, json payload) const { return {kind, id_, std::move(payload)}; }
  SessionMessage error(const std::string& message) const { return reply(MessageKind::Error, {{"message", message}}); }

  SessionMessage hello(const json& p) {
    if (p.contains("action_range")) {
      const std::string r = p["action_range"].get<std::string>();
      if (r == "symmetric") range_ = ActionRange::Symmetric;
      else if (r == "unit") range_ = ActionRange::Unit;
      else return error("action_range must be 'symmetric' or 'unit'");
    }
    if (p.contains("architecture")) {
      cfg_.episode.architecture = architecture_from_string(p["architecture"].get<std::string>());
      env_ = std::make_unique<Environment>(cfg_.workspace, cfg_.episode);
    }
    const bool a = cfg_.episode.architecture == Architecture::A;
    const double lo = range_ == ActionRange::Unit ? 0.0 : -1.0;
    const std::size_t dim = a ? 3 : 4;
    json layout = a ? json::array({"robot", "alpha", "beta"}) : json::array({"final", "robot", "alpha", "beta"});
    const auto& ws = cfg_.workspace;
    return reply(MessageKind::Spec,
                 {{"architecture", std::string(to_string(cfg_.episode.architecture))},
                  {"action_range", range_ == ActionRange::Unit ? "unit" : "symmetric"},
                  {"action_dim", dim},
                  {"action_layout", layout},
                  {"action_low", std::vector<double>(dim, lo)},
                  {"action_high", std::vector<double>(dim, 1.0)},
                  {"observation_dim", 7},
                  {"observation_layout", {"x", "y", "theta", "x_goal", "y_goal", "theta_goal", "prev_robot"}},
                  {"robot_codes", {{"none", 0}, {"L", -1}, {"R", 1}}},
                  {"epsilon", env_->config().epsilon},
                  {"curriculum", cfg_.curriculum.stages},
                  {"max_steps", cfg_.episode.max_steps},
                  {"rewards",
                   {{"success_a", cfg_.episode.reward_success_a},
                    {"success_b", cfg_.episode.reward_success},
                    {"step", cfg_.episode.reward_step},
                    {"fail", cfg_.episode.reward_fail}}},
                  {"workspace", {{"r_min", ws.left.r_min}, {"r_max", ws.left.r_max}, {"d", ws.d}}}});
  }

  SessionMessage reset(const json& p) {
    std::optional<std::uint64_t> seed;
    std::optional<ObjectState> start, goal;
    if (p.contains("seed")) seed = p["seed"].get<std::uint64_t>();
    if (p.contains("start")) start = object_state_from_json(p["start"]);
    if (p.contains("goal")) goal = object_state_from_json(p["goal"]);
    if (p.contains("stage")) env_->set_epsilon(cfg_.curriculum.epsilon(p["stage"].get<std::size_t>()));
    const AugmentedState& s = env_->reset(seed, start, goal);
    return reply(MessageKind::Observation, {{"obs", observation(s)}, {"epsilon", env_->config().epsilon}});
  }

  SessionMessage step(const json& p) {
    if (!env_->started()) return error("no active episode; send reset first");
    if (env_->done()) return error("episode finished");
    if (!p.contains("action")) return error("step requires an action");
    const Action a = decode_action(p["action"], env_->config().architecture, range_);
    const Transition t = env_->step(a);
    return reply(MessageKind::Transition, {{"obs", observation(t.next_state)},
                                           {"reward", t.reward},
                                           {"done", t.done},
                                           {"reason", std::string(to_string(t.reason))},
                                           {"step", t.step}});
  }

  std::string id_;
  AppConfig cfg_;
  std::unique_ptr<Environment> env_;
  ActionRange range_{ActionRange::Symmetric};
  bool closed_{false};
};

}  // namespace handover
