// SPDX-License-Identifier: Apache-2.0
#include "fsmforge/stimgen.hpp"

#include <deque>
#include <map>

#include "fsmforge/rng.hpp"

namespace fsmforge {

namespace {

constexpr uint64_t kTailSalt = 0x57111c0de5eed001ULL;  // keeps the tail off other seed streams

struct FeasibleIndex {
  Simulator sim;
  // per state index: (edge index, witness valuation, target state index)
  struct Edge {
    int edge;
    InputValuation witness;
    int next;
  };
  std::vector<std::vector<Edge>> adj;
  std::set<std::pair<int, int>> feasible;  // (state idx, edge idx), reachable sources only

  explicit FeasibleIndex(const SemanticFsm& f) : sim(f) {
    const int n_states = sim.state_count();
    adj.resize(n_states);
    for (int si = 0; si < n_states; ++si) {
      const StateDef& def = *f.find_state(sim.state_name(si));
      for (size_t e = 0; e < def.transitions.size(); ++e) {
        auto witness = solve_priority(def, e, f.inputs);
        if (!witness) continue;
        adj[si].push_back({static_cast<int>(e), std::move(*witness),
                           sim.state_index(def.transitions[e].next)});
      }
    }
    // fixed point: feasible edges from states reachable via feasible edges
    std::deque<int> work{sim.reset_index()};
    std::vector<bool> seen(n_states, false);
    seen[sim.reset_index()] = true;
    while (!work.empty()) {
      const int cur = work.front();
      work.pop_front();
      for (const Edge& e : adj[cur]) {
        feasible.emplace(cur, e.edge);
        if (!seen[e.next]) {
          seen[e.next] = true;
          work.push_back(e.next);
        }
      }
    }
  }

  // Shortest feasible path from -> to; ties broken by declaration order.
  // Returns edge sequence, empty when from == to, nullopt when unreachable.
  std::optional<std::vector<Edge>> path(int from, int to) const {
    if (from == to) return std::vector<Edge>{};
    std::map<int, std::pair<int, Edge>> parent;  // node -> (prev node, edge taken)
    std::deque<int> work{from};
    while (!work.empty()) {
      const int cur = work.front();
      work.pop_front();
      for (const Edge& e : adj[cur]) {
        if (!feasible.count({cur, e.edge})) continue;
        if (e.next == from || parent.count(e.next)) continue;
        parent.emplace(e.next, std::make_pair(cur, e));
        if (e.next == to) {
          std::vector<Edge> out;
          int walk = to;
          while (walk != from) {
            const auto& [prev, edge] = parent.at(walk);
            out.push_back(edge);
            walk = prev;
          }
          std::reverse(out.begin(), out.end());
          return out;
        }
        work.push_back(e.next);
      }
    }
    return std::nullopt;
  }
};

}  // namespace

std::set<std::pair<std::string, int>> feasible_edges(const SemanticFsm& f) {
  const FeasibleIndex index(f);
  std::set<std::pair<std::string, int>> out;
  for (const auto& [si, e] : index.feasible) out.emplace(index.sim.state_name(si), e);
  return out;
}

StimulusPlan plan(const SemanticFsm& f, uint64_t seed, size_t tail_len) {
  if (f.inputs.size() > static_cast<size_t>(kMaxEnumerableInputs))
    throw CapacityError("plan: " + std::to_string(f.inputs.size()) +
                        " inputs exceed the enumeration bound of " +
                        std::to_string(kMaxEnumerableInputs));

  const FeasibleIndex index(f);
  const Simulator& sim = index.sim;

  StimulusPlan out;
  out.seed = seed;

  std::set<std::pair<int, int>> uncovered = index.feasible;
  int current = sim.reset_index();

  auto take = [&](const FeasibleIndex::Edge& e, std::vector<InputValuation>& vals) {
    vals.push_back(e.witness);
    uncovered.erase({current, e.edge});
    current = e.next;
  };

  bool progress = true;
  while (!uncovered.empty() && progress) {
    progress = false;
    // deterministic sweep in declaration order
    for (int si = 0; si < sim.state_count() && !uncovered.empty(); ++si) {
      for (const auto& e : index.adj[si]) {
        if (!uncovered.count({si, e.edge})) continue;
        const auto path = index.path(current, si);
        if (!path) continue;  // may open up after other segments move the machine
        PlanSegment seg;
        seg.target = {sim.state_name(si), e.edge};
        for (const auto& step : *path) take(step, seg.valuations);
        take(e, seg.valuations);
        out.segments.push_back(std::move(seg));
        progress = true;
      }
    }
  }
  if (!uncovered.empty())
    throw PlanError("plan: " + std::to_string(uncovered.size()) +
                    " feasible edge(s) cannot be reached in one contiguous run");

  Rng rng(seed ^ kTailSalt);
  const uint64_t space = uint64_t{1} << f.inputs.size();
  for (size_t i = 0; i < tail_len; ++i)
    out.random_tail.push_back(valuation_from_mask(f.inputs, rng.bounded(space)));
  return out;
}

std::vector<InputValuation> flatten(const StimulusPlan& p) {
  std::vector<InputValuation> out;
  for (const PlanSegment& seg : p.segments)
    out.insert(out.end(), seg.valuations.begin(), seg.valuations.end());
  out.insert(out.end(), p.random_tail.begin(), p.random_tail.end());
  return out;
}

nlohmann::json coverage_sidecar(const SemanticFsm& f, const StimulusPlan& p) {
  const Simulator sim(f);
  nlohmann::json covered = nlohmann::json::array();
  int cur = sim.reset_index();
  const auto inputs = flatten(p);
  for (size_t t = 0; t < inputs.size(); ++t) {
    int edge = -1;
    const int next = sim.step_mask(cur, mask_from_valuation(f.inputs, inputs[t]), &edge);
    if (edge >= 0)
      covered.push_back({{"cycle", t}, {"state", sim.state_name(cur)}, {"edge", edge}});
    cur = next;
  }
  return nlohmann::json{{"covered", std::move(covered)}};
}

}  // namespace fsmforge
