// SPDX-License-Identifier: Apache-2.0
#include "fsmforge/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace fsmforge {

const StateDef* SemanticFsm::find_state(const std::string& n) const {
  for (const auto& [name, def] : states)
    if (name == n) return &def;
  return nullptr;
}

std::optional<int> SemanticFsm::output_width(const std::string& n) const {
  for (const auto& [name, width] : outputs)
    if (name == n) return width;
  return std::nullopt;
}

size_t SemanticFsm::explicit_edge_count() const {
  size_t n = 0;
  for (const auto& [name, def] : states) n += def.transitions.size();
  return n;
}

Tier tier_of(int n_states) {
  if (n_states < 4 || n_states > 59)
    throw std::out_of_range("state count " + std::to_string(n_states) +
                            " outside the supported interval [4, 59]");
  if (n_states < 14) return Tier::Low;
  if (n_states < 27) return Tier::Medium;
  return Tier::High;
}

std::pair<int, int> tier_bounds(Tier t) {
  switch (t) {
    case Tier::Low:
      return {4, 14};
    case Tier::Medium:
      return {14, 27};
    case Tier::High:
      return {27, 60};
  }
  return {0, 0};
}

std::string tier_name(Tier t) {
  switch (t) {
    case Tier::Low:
      return "low";
    case Tier::Medium:
      return "medium";
    case Tier::High:
      return "high";
  }
  return "?";
}

std::optional<Tier> tier_from_name(const std::string& s) {
  if (s == "low") return Tier::Low;
  if (s == "medium") return Tier::Medium;
  if (s == "high") return Tier::High;
  return std::nullopt;
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  auto start = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  if (!start(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), [&](char c) {
    return start(c) || (c >= '0' && c <= '9');
  });
}

bool ValidationReport::has(const std::string& code) const {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const ValidationIssue& i) { return i.code == code; });
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& i : issues) {
    out += i.code;
    out += ' ';
    out += i.subject;
    if (!i.detail.empty()) {
      out += ": ";
      out += i.detail;
    }
    out += '\n';
  }
  return out;
}

namespace {

void collect_guard_vars(const Guard& g, std::vector<std::string>& out) {
  if (g.kind == Guard::Kind::Var) out.push_back(g.var);
  for (const Guard& c : g.children) collect_guard_vars(c, out);
}

}  // namespace

ValidationReport validate_fsm(const SemanticFsm& f) {
  ValidationReport rep;
  auto issue = [&](std::string code, std::string subject, std::string detail = "") {
    rep.issues.push_back({std::move(code), std::move(subject), std::move(detail)});
  };

  if (!is_identifier(f.name)) issue("BAD_IDENTIFIER", f.name, "machine name");
  if (!is_identifier(f.clock_name)) issue("BAD_IDENTIFIER", f.clock_name, "clock name");
  if (!is_identifier(f.reset_name)) issue("BAD_IDENTIFIER", f.reset_name, "reset name");

  std::set<std::string> input_set, output_set, state_set;
  for (const auto& in : f.inputs) {
    if (!is_identifier(in)) issue("BAD_IDENTIFIER", in, "input name");
    if (!input_set.insert(in).second) issue("DUPLICATE_NAME", in, "input declared twice");
    if (in == f.clock_name || in == f.reset_name)
      issue("NAME_CLASH", in, "input collides with clock/reset");
  }
  for (const auto& [out, width] : f.outputs) {
    if (!is_identifier(out)) issue("BAD_IDENTIFIER", out, "output name");
    if (!output_set.insert(out).second) issue("DUPLICATE_NAME", out, "output declared twice");
    if (input_set.count(out)) issue("NAME_CLASH", out, "output collides with an input");
    if (out == f.clock_name || out == f.reset_name)
      issue("NAME_CLASH", out, "output collides with clock/reset");
    if (width < 1) issue("BAD_WIDTH", out, "width must be >= 1");
  }
  for (const auto& [name, def] : f.states) {
    if (!is_identifier(name)) issue("BAD_IDENTIFIER", name, "state name");
    if (!state_set.insert(name).second) issue("DUPLICATE_NAME", name, "state declared twice");
  }

  if (!state_set.count(f.reset_state))
    issue("RESET_UNDECLARED", f.reset_state, "reset state is not declared");

  for (const auto& [name, def] : f.states) {
    std::set<std::string> assigned;
    for (const auto& [out, value] : def.outputs) {
      if (!output_set.count(out)) {
        issue("UNDECLARED_OUTPUT", out, "assigned in state " + name);
        continue;
      }
      assigned.insert(out);
      const int width = *f.output_width(out);
      if (width < 64 && value >= (uint64_t{1} << width))
        issue("OUTPUT_RANGE", out,
              "value " + std::to_string(value) + " does not fit " +
                  std::to_string(width) + " bit(s) in state " + name);
    }
    for (const auto& [out, width] : f.outputs)
      if (!assigned.count(out)) issue("MISSING_OUTPUT", out, "missing in state " + name);

    for (size_t i = 0; i < def.transitions.size(); ++i) {
      const Transition& t = def.transitions[i];
      if (!state_set.count(t.next))
        issue("UNDECLARED_STATE", t.next,
              "target of transition " + std::to_string(i) + " from " + name);
      std::vector<std::string> vars;
      collect_guard_vars(t.guard, vars);
      for (const auto& v : vars)
        if (!input_set.count(v))
          issue("UNDECLARED_INPUT", v,
                "guard of transition " + std::to_string(i) + " from " + name);
    }
  }
  return rep;
}

}  // namespace fsmforge
