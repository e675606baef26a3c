// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include "fsmforge/core.hpp"

namespace fsmforge {

/// Error in the YAML document itself: syntax (line/column from the parser)
/// or schema (unknown key, wrong type, missing field).
class YamlError : public std::runtime_error {
 public:
  YamlError(std::string code, const std::string& msg, int line = -1, int column = -1)
      : std::runtime_error(msg), code(std::move(code)), line(line), column(column) {}
  std::string code;  // SYNTAX, MISSING_FIELD, UNKNOWN_KEY, WRONG_TYPE, BAD_VALUE
  int line;
  int column;
};

/// Parses the semantic FSM document:
///
///   name: <identifier>
///   clock: <identifier>              # optional, default clk
///   reset: {signal: <id>, kind: synchronous, active: high, state: <State>}
///   inputs: [<id>, ...]
///   outputs: {<id>: <width>, ...}
///   states:
///     <State>:
///       outputs: {<output>: <uint>, ...}
///       transitions:
///         - {guard: "<expr>", next: <State>}
///
/// Unknown keys are errors; transition order is preserved; the result is
/// checked with validate_fsm (violations raise ValidationError).
SemanticFsm parse_fsm_yaml(const std::string& text);

/// Canonical, byte-deterministic serialization: key order name, clock, reset,
/// inputs, outputs, states; states in declaration order; transitions in
/// priority order; guards via print_guard.
std::string serialize_fsm_yaml(const SemanticFsm& f);

}  // namespace fsmforge
