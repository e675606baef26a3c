// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fsmforge {

struct StateDef;

/// Boolean expression tree over single-bit input names.
///
/// Grammar accepted by parse_guard (whitespace insignificant):
///   expr   := term ('|' term)*
///   term   := factor ('&' factor)*
///   factor := '!' factor | '(' expr ')' | identifier | '0' | '1'
struct Guard {
  enum class Kind { Const, Var, Not, And, Or };

  Kind kind = Kind::Const;
  int bit = 0;                  // Const payload
  std::string var;              // Var payload
  std::vector<Guard> children;  // Not: 1 child; And/Or: >= 2 children

  static Guard constant(int b);
  static Guard variable(std::string name);
  static Guard negate(Guard g);
  static Guard conj(std::vector<Guard> terms);
  static Guard disj(std::vector<Guard> terms);

  bool operator==(const Guard&) const = default;
};

/// Total map from input name to bit value.
using InputValuation = std::map<std::string, int>;

class GuardParseError : public std::runtime_error {
 public:
  GuardParseError(size_t offset, std::string expected, const std::string& msg)
      : std::runtime_error(msg), offset(offset), expected(std::move(expected)) {}
  size_t offset;
  std::string expected;  // expected-token set, human readable
};

class GuardEvalError : public std::runtime_error {
 public:
  GuardEvalError(std::string variable, const std::string& msg)
      : std::runtime_error(msg), variable(std::move(variable)) {}
  std::string variable;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Guard parse_guard(std::string_view text);

/// Canonical text; parse_guard(print_guard(g)) rebuilds a tree equal to g.
/// And-children of Or nodes (and vice versa) are parenthesized.
std::string print_guard(const Guard& g);

int eval_guard(const Guard& g, const InputValuation& v);

/// Witness under which transitions [0, edge_index) are false and edge_index
/// fires, i.e. the priority scan selects exactly edge_index. Deterministic:
/// the lexicographically lowest valuation over the declared input order.
/// Returns nullopt when the edge is priority-shadowed or unsatisfiable.
std::optional<InputValuation> solve_priority(const StateDef& state,
                                             size_t edge_index,
                                             const std::vector<std::string>& inputs);

/// Guard with variables resolved to positions in a fixed input list; used by
/// the simulator and equivalence engine for mask-based evaluation.
struct IndexedGuard {
  Guard::Kind kind = Guard::Kind::Const;
  int bit = 0;
  int var_pos = -1;
  std::vector<IndexedGuard> children;
};

IndexedGuard index_guard(const Guard& g, const std::vector<std::string>& inputs);

/// Mask convention: input i (declaration order) holds bit (n-1-i), so
/// ascending masks enumerate valuations in lexicographic input order.
int eval_indexed(const IndexedGuard& g, uint64_t mask, int n_inputs);

InputValuation valuation_from_mask(const std::vector<std::string>& inputs, uint64_t mask);
uint64_t mask_from_valuation(const std::vector<std::string>& inputs, const InputValuation& v);

/// Hard bound on exhaustive valuation enumeration (2^20 cases).
inline constexpr int kMaxEnumerableInputs = 20;

}  // namespace fsmforge
