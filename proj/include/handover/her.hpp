#pragma once

// Hindsight relabeling of finished episodes.
//
// Each transition is replayed through the deterministic transition function
// with a substituted goal taken from a pose the episode actually reached, so
// relabeled rewards follow the same case tables as live steps.

#include <vector>

#include "handover/env.hpp"
#include "handover/random.hpp"

namespace handover {

/// Returns k relabeled copies of every transition, grouped per transition.
/// Architecture B draws goals with the "future" strategy (a pose reached at
/// or after the transition); architecture A can only use the final pose.
inline std::vector<Transition> relabel_her(const Workspace& ws, const EpisodeConfig& cfg,
                                           const EpisodeTrace& episode, int k, Rng& rng) {
  if (episode.transitions.empty()) throw DomainError("relabel_her: empty episode");
  if (k < 0) throw DomainError("relabel_her: k must be non-negative");
  if (episode.architecture != cfg.architecture) throw DomainError("relabel_her: architecture mismatch");

  const auto& ts = episode.transitions;
  const std::size_t n = ts.size();
  std::vector<Transition> out;
  out.reserve(n * static_cast<std::size_t>(k));

  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < k; ++c) {
      std::size_t j = n - 1;
      if (episode.architecture == Architecture::B) j = i + uniform_index(rng, n - i);
      const ObjectState goal = ts[j].next_state.current;

      AugmentedState s = ts[i].state;
      s.goal = goal;
      out.push_back(step(ws, cfg, s, ts[i].action, ts[i].step));
    }
  }
  return out;
}

}  // namespace handover
