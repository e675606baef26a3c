// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <utility>

#include "fsmforge/core.hpp"
#include "fsmforge/rng.hpp"

namespace fsmforge {

struct PhaseSample {
  Phase phase;
  std::set<std::pair<int, int>> edges;  // internal to the phase
};

struct GraphSample {
  AbstractGraph graph;
  TopoConfig config;  // echo of the configuration that produced the graph
};

void validate_config(const TopoConfig& cfg);  // throws ConfigError

/// One phase: minimal entry->exit chain, then forward branches, back edges
/// and self-loops under cfg's probabilities. One out-edge slot on the exit
/// stays reserved for the phase-cycle edge added by sample_graph.
PhaseSample sample_phase(const TopoConfig& cfg, Rng& rng, int id_base);

/// Full graph: reset block, phase cycle, inter-phase jumps. Deterministic in
/// (cfg, cfg.seed); draw order is fixed (phases first, then jumps).
GraphSample sample_graph(const TopoConfig& cfg);

/// Tier-specific configuration; the population over seeds tracks the per-tier
/// mean phase and edge targets. Tuning tables live in topo.cpp.
TopoConfig preset_config(Tier tier, uint64_t seed);

std::string graph_to_json(const AbstractGraph& g);
AbstractGraph graph_from_json(const std::string& text);

/// Structural invariants (endpoint declarations, phase disjointness,
/// reachability from reset); empty result means the graph is well formed.
std::vector<std::string> validate_graph(const AbstractGraph& g);

int out_degree(const AbstractGraph& g, int state);

}  // namespace fsmforge
