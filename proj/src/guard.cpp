// SPDX-License-Identifier: Apache-2.0
#include "fsmforge/guard.hpp"

#include <unordered_map>

#include "fsmforge/core.hpp"

namespace fsmforge {

Guard Guard::constant(int b) {
  Guard g;
  g.kind = Kind::Const;
  g.bit = b ? 1 : 0;
  return g;
}

Guard Guard::variable(std::string name) {
  Guard g;
  g.kind = Kind::Var;
  g.var = std::move(name);
  return g;
}

Guard Guard::negate(Guard child) {
  Guard g;
  g.kind = Kind::Not;
  g.children.push_back(std::move(child));
  return g;
}

Guard Guard::conj(std::vector<Guard> terms) {
  if (terms.size() == 1) return std::move(terms.front());
  Guard g;
  g.kind = Kind::And;
  g.children = std::move(terms);
  return g;
}

Guard Guard::disj(std::vector<Guard> terms) {
  if (terms.size() == 1) return std::move(terms.front());
  Guard g;
  g.kind = Kind::Or;
  g.children = std::move(terms);
  return g;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Guard parse() {
    Guard g = expr();
    skip_ws();
    if (pos_ != text_.size())
      throw GuardParseError(pos_, "end of input, '|', '&'",
                            err("unexpected trailing input"));
    return g;
  }

 private:
  Guard expr() {
    std::vector<Guard> terms;
    terms.push_back(term());
    while (peek() == '|') {
      ++pos_;
      terms.push_back(term());
    }
    return Guard::disj(std::move(terms));
  }

  Guard term() {
    std::vector<Guard> factors;
    factors.push_back(factor());
    while (peek() == '&') {
      ++pos_;
      factors.push_back(factor());
    }
    return Guard::conj(std::move(factors));
  }

  Guard factor() {
    skip_ws();
    if (pos_ >= text_.size())
      throw GuardParseError(pos_, "'!', '(', identifier, '0', '1'",
                            err("unexpected end of input"));
    const char c = text_[pos_];
    if (c == '!') {
      ++pos_;
      return Guard::negate(factor());
    }
    if (c == '(') {
      ++pos_;
      Guard g = expr();
      if (peek() != ')')
        throw GuardParseError(pos_, "')'", err("missing closing parenthesis"));
      ++pos_;
      return g;
    }
    if (c == '0' || c == '1') {
      ++pos_;
      return Guard::constant(c - '0');
    }
    if (is_ident_start(c)) {
      const size_t start = pos_;
      while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
      return Guard::variable(std::string(text_.substr(start, pos_ - start)));
    }
    throw GuardParseError(pos_, "'!', '(', identifier, '0', '1'",
                          err(std::string("unexpected character '") + c + "'"));
  }

  // Returns the next non-space char without consuming it; 0 at end.
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r'))
      ++pos_;
  }

  std::string err(const std::string& what) const {
    return "guard syntax error at byte " + std::to_string(pos_) + ": " + what;
  }

  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
  }

  std::string_view text_;
  size_t pos_ = 0;
};

void print_node(const Guard& g, std::string& out, bool parenthesize_junction) {
  switch (g.kind) {
    case Guard::Kind::Const:
      out += g.bit ? '1' : '0';
      return;
    case Guard::Kind::Var:
      out += g.var;
      return;
    case Guard::Kind::Not: {
      out += '!';
      const Guard& c = g.children.front();
      const bool wrap = c.kind == Guard::Kind::And || c.kind == Guard::Kind::Or;
      if (wrap) out += '(';
      print_node(c, out, false);
      if (wrap) out += ')';
      return;
    }
    case Guard::Kind::And:
    case Guard::Kind::Or: {
      if (parenthesize_junction) out += '(';
      const char* sep = g.kind == Guard::Kind::And ? " & " : " | ";
      bool first = true;
      for (const Guard& c : g.children) {
        if (!first) out += sep;
        first = false;
        // any junction nested under a junction is parenthesized
        print_node(c, out, c.kind == Guard::Kind::And || c.kind == Guard::Kind::Or);
      }
      if (parenthesize_junction) out += ')';
      return;
    }
  }
}

}  // namespace

Guard parse_guard(std::string_view text) { return Parser(text).parse(); }

std::string print_guard(const Guard& g) {
  std::string out;
  print_node(g, out, false);
  return out;
}

int eval_guard(const Guard& g, const InputValuation& v) {
  switch (g.kind) {
    case Guard::Kind::Const:
      return g.bit;
    case Guard::Kind::Var: {
      auto it = v.find(g.var);
      if (it == v.end())
        throw GuardEvalError(g.var, "unknown variable '" + g.var + "' in guard");
      return it->second ? 1 : 0;
    }
    case Guard::Kind::Not:
      return eval_guard(g.children.front(), v) ? 0 : 1;
    case Guard::Kind::And:
      for (const Guard& c : g.children)
        if (!eval_guard(c, v)) return 0;
      return 1;
    case Guard::Kind::Or:
      for (const Guard& c : g.children)
        if (eval_guard(c, v)) return 1;
      return 0;
  }
  return 0;
}

IndexedGuard index_guard(const Guard& g, const std::vector<std::string>& inputs) {
  IndexedGuard out;
  out.kind = g.kind;
  out.bit = g.bit;
  if (g.kind == Guard::Kind::Var) {
    for (size_t i = 0; i < inputs.size(); ++i)
      if (inputs[i] == g.var) {
        out.var_pos = static_cast<int>(i);
        break;
      }
    if (out.var_pos < 0)
      throw GuardEvalError(g.var, "unknown variable '" + g.var + "' in guard");
  }
  out.children.reserve(g.children.size());
  for (const Guard& c : g.children) out.children.push_back(index_guard(c, inputs));
  return out;
}

int eval_indexed(const IndexedGuard& g, uint64_t mask, int n_inputs) {
  switch (g.kind) {
    case Guard::Kind::Const:
      return g.bit;
    case Guard::Kind::Var:
      return static_cast<int>((mask >> (n_inputs - 1 - g.var_pos)) & 1u);
    case Guard::Kind::Not:
      return eval_indexed(g.children.front(), mask, n_inputs) ? 0 : 1;
    case Guard::Kind::And:
      for (const IndexedGuard& c : g.children)
        if (!eval_indexed(c, mask, n_inputs)) return 0;
      return 1;
    case Guard::Kind::Or:
      for (const IndexedGuard& c : g.children)
        if (eval_indexed(c, mask, n_inputs)) return 1;
      return 0;
  }
  return 0;
}

InputValuation valuation_from_mask(const std::vector<std::string>& inputs, uint64_t mask) {
  InputValuation v;
  const int n = static_cast<int>(inputs.size());
  for (int i = 0; i < n; ++i)
    v[inputs[i]] = static_cast<int>((mask >> (n - 1 - i)) & 1u);
  return v;
}

uint64_t mask_from_valuation(const std::vector<std::string>& inputs, const InputValuation& v) {
  uint64_t mask = 0;
  const int n = static_cast<int>(inputs.size());
  for (int i = 0; i < n; ++i) {
    auto it = v.find(inputs[i]);
    if (it == v.end())
      throw GuardEvalError(inputs[i], "valuation missing input '" + inputs[i] + "'");
    if (it->second) mask |= uint64_t{1} << (n - 1 - i);
  }
  return mask;
}

std::optional<InputValuation> solve_priority(const StateDef& state,
                                             size_t edge_index,
                                             const std::vector<std::string>& inputs) {
  if (edge_index >= state.transitions.size())
    throw std::out_of_range("solve_priority: edge index " + std::to_string(edge_index) +
                            " out of range");
  const int n = static_cast<int>(inputs.size());
  if (n > kMaxEnumerableInputs)
    throw CapacityError("solve_priority: " + std::to_string(n) +
                        " inputs exceed the enumeration bound of " +
                        std::to_string(kMaxEnumerableInputs));

  std::vector<IndexedGuard> guards;
  guards.reserve(edge_index + 1);
  for (size_t i = 0; i <= edge_index; ++i)
    guards.push_back(index_guard(state.transitions[i].guard, inputs));

  const uint64_t space = uint64_t{1} << n;
  for (uint64_t mask = 0; mask < space; ++mask) {
    bool shadowed = false;
    for (size_t i = 0; i < edge_index; ++i)
      if (eval_indexed(guards[i], mask, n)) {
        shadowed = true;
        break;
      }
    if (shadowed) continue;
    if (eval_indexed(guards[edge_index], mask, n))
      return valuation_from_mask(inputs, mask);
  }
  return std::nullopt;
}

}  // namespace fsmforge
