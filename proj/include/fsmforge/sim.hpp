// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fsmforge/core.hpp"
#include "fsmforge/guard.hpp"

namespace fsmforge {

/// Per-cycle record: row t pairs inputs[t] with the Moore outputs of s_t.
struct TraceRow {
  InputValuation inputs;
  std::map<std::string, uint64_t> outputs;

  bool operator==(const TraceRow&) const = default;
};

struct Trace {
  std::vector<std::string> input_names;   // declaration order, for CSV columns
  std::vector<std::string> output_names;  // declaration order
  std::vector<TraceRow> rows;

  bool operator==(const Trace&) const = default;
};

struct StepResult {
  std::string next;
  std::optional<int> edge;  // nullopt = implicit else (state holds)

  bool operator==(const StepResult&) const = default;
};

struct Coverage {
  std::set<std::string> states;
  std::set<std::pair<std::string, int>> edges;  // (state, transition index)

  bool operator==(const Coverage&) const = default;
};

/// Indexed, mask-based interpreter for one SemanticFsm. Construction
/// validates the machine and compiles guards against the input list; when the
/// machine has few inputs the full transition table is precomputed.
class Simulator {
 public:
  explicit Simulator(const SemanticFsm& f);

  int state_count() const { return static_cast<int>(state_names_.size()); }
  int n_inputs() const { return n_inputs_; }
  int reset_index() const { return reset_index_; }
  const std::string& state_name(int idx) const { return state_names_[idx]; }
  int state_index(const std::string& name) const;  // -1 when unknown
  const std::vector<uint64_t>& outputs_of(int state_idx) const { return outputs_[state_idx]; }

  /// Priority scan; edge_taken is -1 on implicit else. O(1) when the table
  /// is precomputed.
  int step_mask(int state_idx, uint64_t input_mask, int* edge_taken = nullptr) const;

  StepResult step(const std::string& state, const InputValuation& v) const;
  Trace run(const std::vector<InputValuation>& inputs) const;
  Coverage coverage(const std::vector<InputValuation>& inputs) const;

  const SemanticFsm& fsm() const { return fsm_; }

 private:
  SemanticFsm fsm_;
  std::vector<std::string> state_names_;
  std::map<std::string, int> index_;
  int reset_index_ = 0;
  int n_inputs_ = 0;
  struct Edge {
    IndexedGuard guard;
    int next;
  };
  std::vector<std::vector<Edge>> edges_;
  std::vector<std::vector<uint64_t>> outputs_;       // per state, declared order
  std::vector<std::vector<int32_t>> table_;          // per state, 2^n entries: next*K+edge
  bool has_table_ = false;
};

StepResult step(const SemanticFsm& f, const std::string& state, const InputValuation& v);
Trace run(const SemanticFsm& f, const std::vector<InputValuation>& inputs);
Coverage coverage(const SemanticFsm& f, const std::vector<InputValuation>& inputs);

/// Golden-trace CSV: header `cycle,<inputs...>,<outputs...>` in declaration
/// order, one row per cycle, unsigned decimals.
std::string trace_to_csv(const Trace& t);

/// Strict parse against a known interface. Output columns may be absent
/// (input-only stimulus files); present columns must match declaration order.
Trace trace_from_csv(const std::string& text, const std::vector<std::string>& input_names,
                     const std::vector<std::string>& output_names);

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fsmforge
