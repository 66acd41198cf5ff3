#pragma once

// Text formats: JSON-lines episode traces, CSV-like plan dumps and JSON
// trajectory exports.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "handover/bspline.hpp"
#include "handover/env.hpp"
#include "handover/planner.hpp"

namespace handover {

using nlohmann::json;

inline json to_json(const ObjectState& s) { return json::array({s.x, s.y, s.theta}); }

inline ObjectState object_state_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw DomainError("expected [x, y, theta]");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline json to_json(const AugmentedState& s) {
  return {{"current", to_json(s.current)},
          {"goal", to_json(s.goal)},
          {"prev_robot", s.prev_robot ? json(std::string(to_string(*s.prev_robot))) : json(nullptr)}};
}

inline AugmentedState augmented_state_from_json(const json& j) {
  AugmentedState s;
  s.current = object_state_from_json(j.at("current"));
  s.goal = object_state_from_json(j.at("goal"));
  const json& prev = j.at("prev_robot");
  if (!prev.is_null()) s.prev_robot = robot_from_string(prev.get<std::string>());
  return s;
}

inline json to_json(const Action& a) {
  if (const auto* x = std::get_if<ActionA>(&a))
    return {{"arch", "A"}, {"b", std::string(to_string(x->b))}, {"alpha", x->alpha}, {"beta", x->beta}};
  const auto& y = std::get<ActionB>(a);
  return {{"arch", "B"}, {"f", y.f}, {"b", std::string(to_string(y.b))}, {"alpha", y.alpha}, {"beta", y.beta}};
}

inline Action action_from_json(const json& j) {
  const RobotId b = robot_from_string(j.at("b").get<std::string>());
  const double alpha = j.at("alpha").get<double>();
  const double beta = j.at("beta").get<double>();
  if (architecture_from_string(j.at("arch").get<std::string>()) == Architecture::A) return ActionA{b, alpha, beta};
  return ActionB{j.at("f").get<bool>(), b, alpha, beta};
}

inline json to_json(const Transition& t) {
  return {{"step", t.step},
          {"state", to_json(t.state)},
          {"action", to_json(t.action)},
          {"reward", t.reward},
          {"next_state", to_json(t.next_state)},
          {"done", t.done},
          {"reason", std::string(to_string(t.reason))}};
}

inline Transition transition_from_json(const json& j) {
  Transition t;
  t.step = j.at("step").get<int>();
  t.state = augmented_state_from_json(j.at("state"));
  t.action = action_from_json(j.at("action"));
  t.reward = j.at("reward").get<double>();
  t.next_state = augmented_state_from_json(j.at("next_state"));
  t.done = j.at("done").get<bool>();
  t.reason = termination_from_string(j.at("reason").get<std::string>());
  return t;
}

/// One transition per line.
inline void write_trace_jsonl(std::ostream& os, const EpisodeTrace& trace) {
  for (const Transition& t : trace.transitions) os << to_json(t).dump() << '\n';
}

inline EpisodeTrace read_trace_jsonl(std::istream& is) {
  EpisodeTrace trace;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Transition t = transition_from_json(json::parse(line));
    const Architecture arch = std::holds_alternative<ActionA>(t.action) ? Architecture::A : Architecture::B;
    if (first) trace.architecture = arch;
    else if (arch != trace.architecture) throw DomainError("trace mixes architectures");
    first = false;
    trace.transitions.push_back(std::move(t));
  }
  return trace;
}

/// Plan dump: `# start x,y,theta`, `# goal x,y,theta`, `# epsilon e`, a header,
/// then one action per line `f,b,alpha,beta,x,y,theta` with the predicted pose.
inline void write_plan(std::ostream& os, const ObjectState& start, const ObjectState& goal, double epsilon,
                       const Plan& plan) {
  auto pose = [&](const ObjectState& s) {
    std::ostringstream ss;
    ss.precision(17);
    ss << s.x << ',' << s.y << ',' << s.theta;
    return ss.str();
  };
  os.precision(17);
  os << "# start " << pose(start) << '\n';
  os << "# goal " << pose(goal) << '\n';
  os << "# epsilon " << epsilon << '\n';
  os << "f,b,alpha,beta,x,y,theta\n";
  for (std::size_t i = 0; i < plan.actions.size(); ++i) {
    const ActionB& a = plan.actions[i];
    os << (a.f ? 1 : 0) << ',' << to_string(a.b) << ',' << a.alpha << ',' << a.beta;
    if (i < plan.predicted_states.size()) os << ',' << pose(plan.predicted_states[i]);
    os << '\n';
  }
}

struct PlanFile {
  ObjectState start;
  ObjectState goal;
  double epsilon{0.1};
  Plan plan;
};

inline PlanFile read_plan(std::istream& is) {
  PlanFile pf;
  bool have_start = false;
  bool have_goal = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
  };
  auto pose = [&](const std::string& s) {
    const auto v = split(s);
    if (v.size() != 3) throw DomainError("plan file: malformed pose '" + s + "'");
    return ObjectState{std::stod(v[0]), std::stod(v[1]), std::stod(v[2])};
  };
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.rfind("f,b,", 0) == 0) continue;
    if (line.rfind("# start ", 0) == 0) { pf.start = pose(line.substr(8)); have_start = true; continue; }
    if (line.rfind("# goal ", 0) == 0) { pf.goal = pose(line.substr(7)); have_goal = true; continue; }
    if (line.rfind("# epsilon ", 0) == 0) { pf.epsilon = std::stod(line.substr(10)); continue; }
    if (line[0] == '#') continue;
    const auto v = split(line);
    if (v.size() != 4 && v.size() != 7) throw DomainError("plan file: malformed action line '" + line + "'");
    pf.plan.actions.push_back({v[0] == "1", robot_from_string(v[1]), std::stod(v[2]), std::stod(v[3])});
    if (v.size() == 7) pf.plan.predicted_states.push_back({std::stod(v[4]), std::stod(v[5]), std::stod(v[6])});
  }
  if (!have_start || !have_goal) throw DomainError("plan file: missing start or goal header");
  return pf;
}

inline json to_json(const SplineTrajectory& t) {
  json ctrl = json::array();
  for (const JointVector& q : t.control) ctrl.push_back(q.q);
  return {{"degree", t.degree}, {"knot_count", t.knot_count}, {"knots", t.knots}, {"control_points", ctrl}};
}

inline SplineTrajectory trajectory_from_json(const json& j) {
  std::vector<JointVector> ctrl;
  for (const json& c : j.at("control_points")) {
    JointVector q;
    q.q = c.get<std::array<double, kJointCount>>();
    ctrl.push_back(q);
  }
  SplineTrajectory t = SplineTrajectory::clamped(j.at("knot_count").get<int>(), j.at("degree").get<int>(), ctrl);
  if (j.contains("knots") && j.at("knots").get<std::vector<double>>() != t.knots)
    throw DomainError("trajectory: only clamped uniform knot vectors are supported");
  return t;
}

}  // namespace handover
