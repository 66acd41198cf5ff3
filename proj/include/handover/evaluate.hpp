#pragma once

// Batch evaluation of a policy over sampled start/goal pairs.

#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <thread>
#include <vector>

#include "json.hpp"

#include "handover/env.hpp"
#include "handover/planner.hpp"
#include "handover/random.hpp"

namespace handover {

/// Decision-maker queried once per environment step.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode(const AugmentedState&) {}
  virtual Action act(const AugmentedState& state, int step) = 0;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

/// Follows the planner's shortest plan, replanning whenever the observed pose
/// deviates from the predicted one.
class PlannerPolicy : public Policy {
 public:
  PlannerPolicy(std::shared_ptr<const Planner> planner, EpisodeConfig cfg)
      : planner_(std::move(planner)), cfg_(cfg) {}

  void begin_episode(const AugmentedState&) override { plan_ = {}; next_ = 0; }

  Action act(const AugmentedState& state, int step) override {
    const bool on_track = next_ < plan_.actions.size() &&
                          (next_ == 0 ? state.current == start_ : state.current == plan_.predicted_states[next_ - 1]);
    if (!on_track) {
      const int remaining = std::max(1, cfg_.max_steps - step);
      PlanResult r = planner_->plan(state.current, state.goal, cfg_.epsilon, remaining);
      plan_ = std::move(r.plan);
      start_ = state.current;
      next_ = 0;
      if (plan_.actions.empty()) plan_.actions.push_back(fallback(state));
    }
    const ActionB a = plan_.actions[next_++];
    if (cfg_.architecture == Architecture::B) return a;
    // The external check finishes architecture-A episodes, so a final leg
    // becomes a drop by the same robot at the center of the mutual space.
    if (a.f) return ActionA{a.b, 0.0, 0.0};
    return ActionA{a.b, a.alpha, a.beta};
  }

 private:
  ActionB fallback(const AugmentedState& s) const {
    const Workspace& ws = planner_->workspace();
    for (RobotId b : kRobots) {
      if (ws.contains(b, s.current.position(), kBoundaryTolerance)) return {false, b, 0.0, 0.0};
    }
    return {false, RobotId::L, 0.0, 0.0};
  }

  std::shared_ptr<const Planner> planner_;
  EpisodeConfig cfg_;
  Plan plan_;
  ObjectState start_{};
  std::size_t next_{0};
};

/// Uniform random actions; the final flag is raised with probability p_final.
class RandomPolicy : public Policy {
 public:
  RandomPolicy(Architecture arch, std::uint64_t seed, double p_final = 0.5)
      : arch_(arch), rng_(seed), p_final_(p_final) {}

  Action act(const AugmentedState&, int) override {
    const RobotId b = uniform01(rng_) < 0.5 ? RobotId::L : RobotId::R;
    const double alpha = uniform(rng_, -1.0, 1.0);
    const double beta = uniform(rng_, -1.0, 1.0);
    if (arch_ == Architecture::A) return ActionA{b, alpha, beta};
    return ActionB{uniform01(rng_) < p_final_, b, alpha, beta};
  }

 private:
  Architecture arch_;
  Rng rng_;
  double p_final_;
};

struct EpisodeRecord {
  int index{0};
  int steps{0};
  Termination reason{Termination::Step};
  double total_reward{0.0};
  double final_residual{0.0};  ///< |wrap(final yaw - goal yaw)|
  double final_distance{0.0};  ///< distance of the final position to the goal (mm)
};

struct Metrics {
  int episodes{0};
  int successes{0};
  double success_rate{0.0};
  double mean_steps{0.0};
  std::map<Termination, int> histogram;

  [[nodiscard]] int count(Termination t) const {
    const auto it = histogram.find(t);
    return it == histogram.end() ? 0 : it->second;
  }
};

struct EvaluationResult {
  Metrics metrics;
  std::vector<EpisodeRecord> episodes;
};

inline Metrics aggregate(const std::vector<EpisodeRecord>& records) {
  Metrics m;
  m.episodes = static_cast<int>(records.size());
  for (Termination t : kTerminations) m.histogram[t] = 0;
  double steps = 0.0;
  for (const EpisodeRecord& r : records) {
    steps += r.steps;
    ++m.histogram[r.reason];
    if (r.reason == Termination::Success) ++m.successes;
  }
  if (m.episodes > 0) {
    m.success_rate = static_cast<double>(m.successes) / m.episodes;
    m.mean_steps = steps / m.episodes;
  }
  return m;
}

/// Runs one episode to termination. Episodes that end without a terminal
/// reason (cannot happen with max_steps >= 1) report Step.
inline EpisodeRecord run_episode(const Workspace& ws, const EpisodeConfig& cfg, Policy& policy, std::uint64_t seed,
                                 int index = 0, EpisodeTrace* trace = nullptr) {
  Environment env(ws, cfg);
  AugmentedState s = env.reset(seed);
  policy.begin_episode(s);
  EpisodeRecord rec;
  rec.index = index;
  while (!env.done()) {
    const Transition t = env.step(policy.act(s, env.steps()));
    rec.total_reward += t.reward;
    rec.reason = t.reason;
    s = t.next_state;
  }
  rec.steps = env.steps();
  rec.final_residual = std::abs(wrap_angle(s.current.theta - s.goal.theta));
  rec.final_distance = distance(s.current.position(), s.goal.position());
  if (trace) *trace = env.trace();
  return rec;
}

/// Evaluates `n` episodes. Episode i is seeded with mix_seed(seed, i), so the
/// result does not depend on the number of worker threads.
inline EvaluationResult evaluate(const Workspace& ws, const EpisodeConfig& cfg, int n, std::uint64_t seed,
                                 const PolicyFactory& make_policy, unsigned threads = 1) {
  if (n < 1) throw DomainError("evaluate: episode count must be at least 1");
  cfg.validate();
  std::vector<EpisodeRecord> records(static_cast<std::size_t>(n));
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));

  auto worker = [&](unsigned w) {
    auto policy = make_policy();
    for (int i = static_cast<int>(w); i < n; i += static_cast<int>(threads))
      records[static_cast<std::size_t>(i)] = run_episode(ws, cfg, *policy, mix_seed(seed, i), i);
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  EvaluationResult out;
  out.metrics = aggregate(records);
  out.episodes = std::move(records);
  return out;
}

inline PolicyFactory planner_policy_factory(std::shared_ptr<const Planner> planner, const EpisodeConfig& cfg) {
  return [planner, cfg] { return std::make_unique<PlannerPolicy>(planner, cfg); };
}

inline void write_metrics_csv(std::ostream& os, const Metrics& m) {
  os << "episodes,successes,success_rate,mean_steps";
  for (Termination t : kTerminations) os << ',' << to_string(t);
  os << '\n' << m.episodes << ',' << m.successes << ',' << m.success_rate << ',' << m.mean_steps;
  for (Termination t : kTerminations) os << ',' << m.count(t);
  os << '\n';
}

inline nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json hist = nlohmann::json::object();
  for (Termination t : kTerminations) hist[std::string(to_string(t))] = m.count(t);
  return {{"episodes", m.episodes},
          {"successes", m.successes},
          {"success_rate", m.success_rate},
          {"mean_steps", m.mean_steps},
          {"terminations", hist}};
}

inline void write_episodes_csv(std::ostream& os, const std::vector<EpisodeRecord>& records) {
  os << "episode,steps,reason,return,final_residual,final_distance\n";
  for (const EpisodeRecord& r : records) {
    os << r.index << ',' << r.steps << ',' << to_string(r.reason) << ',' << r.total_reward << ','
       << r.final_residual << ',' << r.final_distance << '\n';
  }
}

}  // namespace handover
