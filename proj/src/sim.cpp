// SPDX-License-Identifier: Apache-2.0
#include "fsmforge/sim.hpp"

#include <sstream>

namespace fsmforge {

namespace {
// table entries pack (next_state, edge_taken+1); edge 0 means implicit else
constexpr int32_t kEdgeStride = 1 << 12;  // transitions per state stay far below this
constexpr int kTableInputLimit = 12;      // 2^12 entries per state at most
}  // namespace

Simulator::Simulator(const SemanticFsm& f) : fsm_(f) {
  const ValidationReport rep = validate_fsm(f);
  if (!rep.ok()) throw ValidationError(rep, "simulator needs a valid FSM:\n" + rep.to_string());

  n_inputs_ = static_cast<int>(f.inputs.size());
  for (const auto& [name, def] : fsm_.states) {
    index_[name] = static_cast<int>(state_names_.size());
    state_names_.push_back(name);
  }
  reset_index_ = index_.at(fsm_.reset_state);

  edges_.resize(state_names_.size());
  outputs_.resize(state_names_.size());
  for (size_t si = 0; si < fsm_.states.size(); ++si) {
    const StateDef& def = fsm_.states[si].second;
    for (const Transition& t : def.transitions)
      edges_[si].push_back({index_guard(t.guard, fsm_.inputs), index_.at(t.next)});
    for (const auto& [oname, width] : fsm_.outputs)
      for (const auto& [sname, value] : def.outputs)
        if (sname == oname) {
          outputs_[si].push_back(value);
          break;
        }
  }

  if (n_inputs_ <= kTableInputLimit) {
    const uint64_t space = uint64_t{1} << n_inputs_;
    table_.resize(state_names_.size());
    for (size_t si = 0; si < state_names_.size(); ++si) {
      table_[si].resize(space);
      for (uint64_t mask = 0; mask < space; ++mask) {
        int32_t entry = static_cast<int32_t>(si) * kEdgeStride;  // hold
        for (size_t e = 0; e < edges_[si].size(); ++e)
          if (eval_indexed(edges_[si][e].guard, mask, n_inputs_)) {
            entry = edges_[si][e].next * kEdgeStride + static_cast<int32_t>(e) + 1;
            break;
          }
        table_[si][mask] = entry;
      }
    }
    has_table_ = true;
  }
}

int Simulator::state_index(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int Simulator::step_mask(int state_idx, uint64_t input_mask, int* edge_taken) const {
  if (has_table_) {
    const int32_t entry = table_[state_idx][input_mask];
    if (edge_taken) *edge_taken = entry % kEdgeStride - 1;
    return entry / kEdgeStride;
  }
  const auto& out_edges = edges_[state_idx];
  for (size_t e = 0; e < out_edges.size(); ++e)
    if (eval_indexed(out_edges[e].guard, input_mask, n_inputs_)) {
      if (edge_taken) *edge_taken = static_cast<int>(e);
      return out_edges[e].next;
    }
  if (edge_taken) *edge_taken = -1;
  return state_idx;
}

StepResult Simulator::step(const std::string& state, const InputValuation& v) const {
  const int si = state_index(state);
  if (si < 0) throw std::out_of_range("step: unknown state '" + state + "'");
  int edge = -1;
  const int next = step_mask(si, mask_from_valuation(fsm_.inputs, v), &edge);
  StepResult r;
  r.next = state_names_[next];
  if (edge >= 0) r.edge = edge;
  return r;
}

Trace Simulator::run(const std::vector<InputValuation>& inputs) const {
  Trace t;
  t.input_names = fsm_.inputs;
  for (const auto& [name, width] : fsm_.outputs) t.output_names.push_back(name);

  int cur = reset_index_;
  for (const InputValuation& v : inputs) {
    TraceRow row;
    row.inputs = v;
    for (size_t oi = 0; oi < t.output_names.size(); ++oi)
      row.outputs[t.output_names[oi]] = outputs_[cur][oi];
    t.rows.push_back(std::move(row));
    cur = step_mask(cur, mask_from_valuation(fsm_.inputs, v), nullptr);
  }
  return t;
}

Coverage Simulator::coverage(const std::vector<InputValuation>& inputs) const {
  Coverage c;
  int cur = reset_index_;
  c.states.insert(state_names_[cur]);
  for (const InputValuation& v : inputs) {
    int edge = -1;
    const int next = step_mask(cur, mask_from_valuation(fsm_.inputs, v), &edge);
    if (edge >= 0) c.edges.emplace(state_names_[cur], edge);
    cur = next;
    c.states.insert(state_names_[cur]);
  }
  return c;
}

StepResult step(const SemanticFsm& f, const std::string& state, const InputValuation& v) {
  return Simulator(f).step(state, v);
}

Trace run(const SemanticFsm& f, const std::vector<InputValuation>& inputs) {
  return Simulator(f).run(inputs);
}

Coverage coverage(const SemanticFsm& f, const std::vector<InputValuation>& inputs) {
  return Simulator(f).coverage(inputs);
}

std::string trace_to_csv(const Trace& t) {
  std::ostringstream out;
  out << "cycle";
  for (const auto& n : t.input_names) out << ',' << n;
  for (const auto& n : t.output_names) out << ',' << n;
  out << '\n';
  for (size_t i = 0; i < t.rows.size(); ++i) {
    out << i;
    for (const auto& n : t.input_names) out << ',' << t.rows[i].inputs.at(n);
    for (const auto& n : t.output_names) out << ',' << t.rows[i].outputs.at(n);
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Trace trace_from_csv(const std::string& text, const std::vector<std::string>& input_names,
                     const std::vector<std::string>& output_names) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw TraceError("trace csv: empty file");

  const auto header = split_csv_line(line);
  std::vector<std::string> expect_full = {"cycle"};
  expect_full.insert(expect_full.end(), input_names.begin(), input_names.end());
  std::vector<std::string> expect_inputs = expect_full;
  expect_full.insert(expect_full.end(), output_names.begin(), output_names.end());

  bool with_outputs;
  if (header == expect_full)
    with_outputs = true;
  else if (header == expect_inputs)
    with_outputs = false;
  else
    throw TraceError("trace csv: header does not match the declared interface");

  Trace t;
  t.input_names = input_names;
  if (with_outputs) t.output_names = output_names;

  size_t cycle = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw TraceError("trace csv: row " + std::to_string(cycle) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    size_t col = 0;
    uint64_t value = 0;
    auto parse_cell = [&](const std::string& cell) -> uint64_t {
      try {
        size_t pos = 0;
        value = std::stoull(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw TraceError("trace csv: bad number '" + cell + "' in row " + std::to_string(cycle));
      }
      return value;
    };
    if (parse_cell(cells[col++]) != cycle)
      throw TraceError("trace csv: cycle column must count from 0 in order");
    TraceRow row;
    for (const auto& n : input_names) {
      const uint64_t bit = parse_cell(cells[col++]);
      if (bit > 1) throw TraceError("trace csv: input '" + n + "' must be a bit");
      row.inputs[n] = static_cast<int>(bit);
    }
    if (with_outputs)
      for (const auto& n : output_names) row.outputs[n] = parse_cell(cells[col++]);
    t.rows.push_back(std::move(row));
    ++cycle;
  }
  return t;
}

}  // namespace fsmforge
