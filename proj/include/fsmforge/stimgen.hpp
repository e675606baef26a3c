// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fsmforge/core.hpp"
#include "fsmforge/guard.hpp"
#include "fsmforge/sim.hpp"
#include "json.hpp"

namespace fsmforge {

struct TargetEdge {
  std::string state;
  int edge = 0;

  auto operator<=>(const TargetEdge&) const = default;
};

struct PlanSegment {
  TargetEdge target;
  std::vector<InputValuation> valuations;  // path witnesses, target witness last

  bool operator==(const PlanSegment&) const = default;
};

/// Covering stimulus: segments drive every feasible edge once, then a seeded
/// uniform random tail.
struct StimulusPlan {
  std::vector<PlanSegment> segments;
  std::vector<InputValuation> random_tail;
  uint64_t seed = 0;

  bool operator==(const StimulusPlan&) const = default;
};

/// Edges whose solve_priority witness exists and whose source is reachable
/// from reset through feasible edges (fixed point).
std::set<std::pair<std::string, int>> feasible_edges(const SemanticFsm& f);

/// Plans segments greedily from the state the previous segment left the
/// machine in: shortest path (BFS over feasible edges, ties by declaration
/// order) to the target's source, then the target's own witness. Replay of
/// the full plan covers every feasible edge.
StimulusPlan plan(const SemanticFsm& f, uint64_t seed, size_t tail_len);

std::vector<InputValuation> flatten(const StimulusPlan& p);

/// Covered explicit edges per cycle index, as embedded in problem metadata.
nlohmann::json coverage_sidecar(const SemanticFsm& f, const StimulusPlan& p);

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fsmforge
