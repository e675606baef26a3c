// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fsmforge/core.hpp"
#include "fsmforge/guard.hpp"
#include "json.hpp"

namespace fsmforge {

struct IsoResult {
  bool isomorphic = false;
  std::optional<std::pair<int, int>> violation;  // first offending pair, lexicographic ids
  std::string detail;
};

/// Edge-set equality under the bijection m; parallel guarded transitions
/// between the same state pair count as one edge. Throws MappingError when m
/// is not a bijection from g's states onto f's states.
IsoResult check_isomorphism(const AbstractGraph& g, const SemanticFsm& f, const StateMapping& m);

struct EquivVerdict {
  bool equivalent = false;
  std::vector<InputValuation> counterexample;  // shortest prefix; empty when equivalent
  std::optional<int> mismatch_cycle;
  std::optional<std::string> mismatch_output;
};

/// Explicit-state product reachability from (reset_a, reset_b) over all
/// 2^|inputs| valuations per pair. Complete (not bounded) when max_depth is 0
/// or at least |S_a|*|S_b|. A counterexample of k inputs reaches a product
/// pair with differing output maps; the divergence shows at cycle k.
EquivVerdict check_equivalence(const SemanticFsm& a, const SemanticFsm& b, size_t max_depth = 0);

struct OutputDiff {
  int cycle = 0;
  std::string output;
  uint64_t value_a = 0;
  uint64_t value_b = 0;

  bool operator==(const OutputDiff&) const = default;
};

/// Runs both machines over cex and reports every output difference across
/// rows 0..|cex| (a k-input counterexample is judged on k+1 Moore rows).
std::vector<OutputDiff> replay_counterexample(const SemanticFsm& a, const SemanticFsm& b,
                                              const std::vector<InputValuation>& cex);

nlohmann::json verdict_to_json(const EquivVerdict& v);

class MappingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fsmforge
