// SPDX-License-Identifier: Apache-2.0
#include "fsmforge/verify.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "fsmforge/sim.hpp"

namespace fsmforge {

IsoResult check_isomorphism(const AbstractGraph& g, const SemanticFsm& f, const StateMapping& m) {
  std::set<std::string> image;
  for (const int s : g.states) {
    auto it = m.pairs.find(s);
    if (it == m.pairs.end())
      throw MappingError("mapping is not total: abstract state " + std::to_string(s) +
                         " has no image");
    if (!image.insert(it->second).second)
      throw MappingError("mapping is not injective: '" + it->second + "' appears twice");
  }
  std::set<std::string> fsm_states;
  for (const auto& [name, def] : f.states) fsm_states.insert(name);
  if (image != fsm_states)
    throw MappingError("mapping image does not equal the machine's state set");

  // parallel guarded transitions between the same pair count as one edge
  std::set<std::pair<std::string, std::string>> fsm_edges;
  for (const auto& [name, def] : f.states)
    for (const Transition& t : def.transitions) fsm_edges.emplace(name, t.next);

  std::vector<int> ids = g.states;
  std::sort(ids.begin(), ids.end());
  for (const int u : ids)
    for (const int v : ids) {
      const bool in_graph = g.edges.count({u, v}) != 0;
      const bool in_fsm = fsm_edges.count({m.pairs.at(u), m.pairs.at(v)}) != 0;
      if (in_graph != in_fsm) {
        IsoResult r;
        r.isomorphic = false;
        r.violation = {u, v};
        r.detail = std::string(in_graph ? "missing" : "spurious") + " transition (" +
                   m.pairs.at(u) + ", " + m.pairs.at(v) + ")";
        return r;
      }
    }
  return {true, std::nullopt, ""};
}

namespace {

void check_interfaces(const SemanticFsm& a, const SemanticFsm& b) {
  const std::set<std::string> ia(a.inputs.begin(), a.inputs.end());
  const std::set<std::string> ib(b.inputs.begin(), b.inputs.end());
  const std::map<std::string, int> oa(a.outputs.begin(), a.outputs.end());
  const std::map<std::string, int> ob(b.outputs.begin(), b.outputs.end());
  if (ia == ib && oa == ob) return;

  std::string detail = "I/O interfaces differ:";
  for (const auto& s : ia)
    if (!ib.count(s)) detail += " -input:" + s;
  for (const auto& s : ib)
    if (!ia.count(s)) detail += " +input:" + s;
  for (const auto& [s, w] : oa) {
    auto it = ob.find(s);
    if (it == ob.end())
      detail += " -output:" + s;
    else if (it->second != w)
      detail += " width:" + s;
  }
  for (const auto& [s, w] : ob)
    if (!oa.count(s)) detail += " +output:" + s;
  throw InterfaceError(detail);
}

}  // namespace

EquivVerdict check_equivalence(const SemanticFsm& a, const SemanticFsm& b, size_t max_depth) {
  check_interfaces(a, b);
  const int n = static_cast<int>(a.inputs.size());
  if (n > kMaxEnumerableInputs)
    throw CapacityError("check_equivalence: " + std::to_string(n) +
                        " inputs exceed the enumeration bound of " +
                        std::to_string(kMaxEnumerableInputs));

  const Simulator sa(a);
  const Simulator sb(b);
  const size_t na = static_cast<size_t>(sa.state_count());
  const size_t nb = static_cast<size_t>(sb.state_count());
  if (max_depth == 0) max_depth = na * nb;

  // masks are enumerated in a's input order; map each a-bit to its b-bit
  const bool same_order = a.inputs == b.inputs;
  std::vector<int> b_shift(n, 0);
  if (!same_order)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (b.inputs[j] == a.inputs[i]) b_shift[i] = n - 1 - j;
  auto to_b_mask = [&](uint64_t mask) {
    if (same_order) return mask;
    uint64_t out = 0;
    for (int i = 0; i < n; ++i)
      if ((mask >> (n - 1 - i)) & 1u) out |= uint64_t{1} << b_shift[i];
    return out;
  };

  // b's output values aligned to a's declared output order
  std::vector<int> b_out_pos(a.outputs.size(), 0);
  for (size_t i = 0; i < a.outputs.size(); ++i)
    for (size_t j = 0; j < b.outputs.size(); ++j)
      if (b.outputs[j].first == a.outputs[i].first) b_out_pos[i] = static_cast<int>(j);
  auto first_diff = [&](int ia, int ib) -> int {
    const auto& va = sa.outputs_of(ia);
    const auto& vb = sb.outputs_of(ib);
    for (size_t i = 0; i < va.size(); ++i)
      if (va[i] != vb[b_out_pos[i]]) return static_cast<int>(i);
    return -1;
  };

  const uint64_t space = uint64_t{1} << n;
  std::vector<int32_t> parent_pair(na * nb, -1);
  std::vector<uint32_t> parent_mask(na * nb, 0);
  std::vector<int32_t> depth(na * nb, -1);

  const size_t start = static_cast<size_t>(sa.reset_index()) * nb +
                       static_cast<size_t>(sb.reset_index());
  depth[start] = 0;

  auto build_verdict = [&](size_t pair, int diff_output) {
    EquivVerdict v;
    v.equivalent = false;
    v.mismatch_cycle = depth[pair];
    v.mismatch_output = a.outputs[diff_output].first;
    std::vector<uint64_t> masks;
    for (size_t cur = pair; cur != start; cur = static_cast<size_t>(parent_pair[cur]))
      masks.push_back(parent_mask[cur]);
    std::reverse(masks.begin(), masks.end());
    for (const uint64_t m : masks) v.counterexample.push_back(valuation_from_mask(a.inputs, m));
    return v;
  };

  {
    const int d = first_diff(sa.reset_index(), sb.reset_index());
    if (d >= 0) return build_verdict(start, d);
  }

  std::deque<size_t> work{start};
  while (!work.empty()) {
    const size_t pair = work.front();
    work.pop_front();
    if (static_cast<size_t>(depth[pair]) >= max_depth) continue;
    const int ia = static_cast<int>(pair / nb);
    const int ib = static_cast<int>(pair % nb);
    for (uint64_t mask = 0; mask < space; ++mask) {
      const int next_a = sa.step_mask(ia, mask, nullptr);
      const int next_b = sb.step_mask(ib, to_b_mask(mask), nullptr);
      const size_t next = static_cast<size_t>(next_a) * nb + static_cast<size_t>(next_b);
      if (depth[next] >= 0) continue;
      depth[next] = depth[pair] + 1;
      parent_pair[next] = static_cast<int32_t>(pair);
      parent_mask[next] = static_cast<uint32_t>(mask);
      const int d = first_diff(next_a, next_b);
      if (d >= 0) return build_verdict(next, d);
      work.push_back(next);
    }
  }

  EquivVerdict v;
  v.equivalent = true;
  return v;
}

std::vector<OutputDiff> replay_counterexample(const SemanticFsm& a, const SemanticFsm& b,
                                              const std::vector<InputValuation>& cex) {
  check_interfaces(a, b);
  const Simulator sa(a);
  const Simulator sb(b);

  std::vector<int> b_out_pos(a.outputs.size(), 0);
  for (size_t i = 0; i < a.outputs.size(); ++i)
    for (size_t j = 0; j < b.outputs.size(); ++j)
      if (b.outputs[j].first == a.outputs[i].first) b_out_pos[i] = static_cast<int>(j);

  std::vector<OutputDiff> diffs;
  int ia = sa.reset_index();
  int ib = sb.reset_index();
  for (size_t t = 0; t <= cex.size(); ++t) {
    const auto& va = sa.outputs_of(ia);
    const auto& vb = sb.outputs_of(ib);
    for (size_t i = 0; i < va.size(); ++i)
      if (va[i] != vb[b_out_pos[i]])
        diffs.push_back({static_cast<int>(t), a.outputs[i].first, va[i], vb[b_out_pos[i]]});
    if (t == cex.size()) break;
    ia = sa.step_mask(ia, mask_from_valuation(a.inputs, cex[t]), nullptr);
    ib = sb.step_mask(ib, mask_from_valuation(b.inputs, cex[t]), nullptr);
  }
  return diffs;
}

nlohmann::json verdict_to_json(const EquivVerdict& v) {
  nlohmann::json j;
  j["equivalent"] = v.equivalent;
  if (v.equivalent) {
    j["counterexample"] = nullptr;
    j["mismatch_cycle"] = nullptr;
    j["mismatch_output"] = nullptr;
    return j;
  }
  j["counterexample"] = nlohmann::json::array();
  for (const InputValuation& row : v.counterexample) j["counterexample"].push_back(row);
  j["mismatch_cycle"] = *v.mismatch_cycle;
  j["mismatch_output"] = *v.mismatch_output;
  return j;
}

}  // namespace fsmforge
