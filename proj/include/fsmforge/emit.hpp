// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "fsmforge/core.hpp"
#include "fsmforge/sim.hpp"

namespace fsmforge {

enum class StateEncoding { OneHot, Binary };

/// Synthesizable SystemVerilog-2012 subset for a Moore machine: ports
/// (clock, sync active-high reset, 1-bit inputs, outputs at width), a state
/// register, one always_ff, one combinational next-state priority chain and
/// one combinational output block. Byte-deterministic.
std::string emit_rtl(const SemanticFsm& f, StateEncoding enc = StateEncoding::OneHot,
                     const std::string& module_name_override = "");

/// Self-contained testbench around an embedded golden trace. Drives inputs
/// shortly after each active edge and compares outputs just before the next
/// one; prints `LLMFSM_PASS` or
/// `LLMFSM_FAIL cycle=<t> signal=<name> expect=<v> got=<v>` and terminates.
std::string emit_testbench(const SemanticFsm& f, const Trace& golden);

/// Both RTL bodies plus a wrapper whose single `mismatch` output ORs the
/// per-output inequality comparisons. Colliding module names are emitted with
/// _ref/_rec suffixes.
std::string emit_miter(const SemanticFsm& a, const SemanticFsm& b);

inline constexpr const char* kPassSentinel = "LLMFSM_PASS";
inline constexpr const char* kFailSentinel = "LLMFSM_FAIL";

}  // namespace fsmforge
