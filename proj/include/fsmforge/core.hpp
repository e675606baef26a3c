// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fsmforge/guard.hpp"

namespace fsmforge {

/// Single-entry/single-exit subgraph; one coherent operational stage.
struct Phase {
  int entry = 0;
  int exit = 0;
  std::vector<int> members;  // entry first, exit last

  bool operator==(const Phase&) const = default;
};

/// Pure FSM topology: numbered states, phase grouping, directed edges.
struct AbstractGraph {
  std::vector<int> states;  // ascending
  std::vector<Phase> phases;
  std::set<std::pair<int, int>> edges;
  int reset_state = 0;

  bool operator==(const AbstractGraph&) const = default;
};

struct IntRange {
  int lo = 0;
  int hi = 0;  // inclusive

  bool operator==(const IntRange&) const = default;
};

/// Knobs for the phase-based topology sampler.
struct TopoConfig {
  int num_phases = 1;
  IntRange states_per_phase{1, 1};
  double p_forward_branch = 0.0;
  double p_back_edge = 0.0;
  double p_self_loop = 0.0;
  int max_out_degree = 1;
  int num_inter_phase_jumps = 0;
  uint64_t seed = 0;

  bool operator==(const TopoConfig&) const = default;
};

struct Transition {
  Guard guard;
  std::string next;

  bool operator==(const Transition&) const = default;
};

struct StateDef {
  std::vector<std::pair<std::string, uint64_t>> outputs;  // declared output order
  std::vector<Transition> transitions;                    // priority order

  bool operator==(const StateDef&) const = default;
};

/// Named Moore machine. Outputs are per-state constants; transitions are
/// scanned in list order and the first true guard fires (implicit else holds).
struct SemanticFsm {
  std::string name;
  std::string clock_name = "clk";
  std::string reset_name = "rst";
  std::string reset_state;
  std::vector<std::string> inputs;                       // each 1 bit
  std::vector<std::pair<std::string, int>> outputs;      // name -> width
  std::vector<std::pair<std::string, StateDef>> states;  // declaration order

  const StateDef* find_state(const std::string& name) const;
  std::optional<int> output_width(const std::string& name) const;
  size_t explicit_edge_count() const;

  bool operator==(const SemanticFsm&) const = default;
};

/// Bijection from abstract state id to semantic state name.
struct StateMapping {
  std::map<int, std::string> pairs;

  bool operator==(const StateMapping&) const = default;
};

enum class Tier { Low, Medium, High };

/// State-count buckets, left-closed: Low [4,14), Medium [14,27), High [27,59].
Tier tier_of(int n_states);
std::pair<int, int> tier_bounds(Tier t);  // [lo, hi) on integers
std::string tier_name(Tier t);
std::optional<Tier> tier_from_name(const std::string& s);

struct ValidationIssue {
  std::string code;
  std::string subject;
  std::string detail;

  bool operator==(const ValidationIssue&) const = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool has(const std::string& code) const;
  std::string to_string() const;

  bool operator==(const ValidationReport&) const = default;
};

/// Checks every SemanticFsm invariant; violations are data, not failures.
ValidationReport validate_fsm(const SemanticFsm& f);

bool is_identifier(const std::string& s);

class ValidationError : public std::runtime_error {
 public:
  ValidationError(ValidationReport rep, const std::string& msg)
      : std::runtime_error(msg), report(std::move(rep)) {}
  ValidationReport report;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InterfaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fsmforge
