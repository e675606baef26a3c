// SPDX-License-Identifier: Apache-2.0
#include "fsmforge/emit.hpp"

#include <sstream>

namespace fsmforge {

namespace {

int clog2(size_t n) {
  int bits = 0;
  size_t v = 1;
  while (v < n) {
    v <<= 1;
    ++bits;
  }
  return bits;
}

void guard_sv_node(const Guard& g, std::string& out, bool parenthesize_junction) {
  switch (g.kind) {
    case Guard::Kind::Const:
      out += g.bit ? "1'b1" : "1'b0";
      return;
    case Guard::Kind::Var:
      out += g.var;
      return;
    case Guard::Kind::Not: {
      out += '!';
      const Guard& c = g.children.front();
      const bool wrap = c.kind == Guard::Kind::And || c.kind == Guard::Kind::Or;
      if (wrap) out += '(';
      guard_sv_node(c, out, false);
      if (wrap) out += ')';
      return;
    }
    case Guard::Kind::And:
    case Guard::Kind::Or: {
      if (parenthesize_junction) out += '(';
      const char* sep = g.kind == Guard::Kind::And ? " && " : " || ";
      bool first = true;
      for (const Guard& c : g.children) {
        if (!first) out += sep;
        first = false;
        guard_sv_node(c, out, c.kind == Guard::Kind::And || c.kind == Guard::Kind::Or);
      }
      if (parenthesize_junction) out += ')';
      return;
    }
  }
}

std::string guard_sv(const Guard& g) {
  std::string out;
  guard_sv_node(g, out, false);
  return out;
}

std::string width_decl(int width) {
  if (width <= 1) return "";
  return "[" + std::to_string(width - 1) + ":0] ";
}

std::string state_literal(StateEncoding enc, size_t index, size_t n_states, int reg_width) {
  std::ostringstream out;
  if (enc == StateEncoding::OneHot) {
    out << n_states << "'b";
    for (size_t b = n_states; b-- > 0;) out << (b == index ? '1' : '0');
  } else {
    out << reg_width << "'d" << index;
  }
  return out.str();
}

void check_trace_interface(const SemanticFsm& f, const Trace& golden) {
  std::vector<std::string> out_names;
  for (const auto& [n, w] : f.outputs) out_names.push_back(n);
  if (golden.input_names != f.inputs || golden.output_names != out_names)
    throw InterfaceError("golden trace columns do not match the machine's interface");
}

}  // namespace

std::string emit_rtl(const SemanticFsm& f, StateEncoding enc,
                     const std::string& module_name_override) {
  const ValidationReport rep = validate_fsm(f);
  if (!rep.ok()) throw ValidationError(rep, "cannot emit invalid FSM:\n" + rep.to_string());

  const std::string module_name = module_name_override.empty() ? f.name : module_name_override;
  const size_t n_states = f.states.size();
  const int reg_width =
      enc == StateEncoding::OneHot ? static_cast<int>(n_states) : std::max(1, clog2(n_states));

  std::ostringstream out;
  out << "// " << module_name << ": Moore FSM, "
      << (enc == StateEncoding::OneHot ? "one-hot" : "binary") << " state encoding\n";
  out << "module " << module_name << " (\n";
  out << "  input  logic " << f.clock_name << ",\n";
  out << "  input  logic " << f.reset_name;
  for (const auto& in : f.inputs) out << ",\n  input  logic " << in;
  for (const auto& [name, width] : f.outputs)
    out << ",\n  output logic " << width_decl(width) << name;
  out << "\n);\n\n";

  for (size_t i = 0; i < n_states; ++i)
    out << "  localparam logic [" << reg_width - 1 << ":0] S_" << f.states[i].first << " = "
        << state_literal(enc, i, n_states, reg_width) << ";\n";
  out << "\n";
  out << "  logic [" << reg_width - 1 << ":0] state;\n";
  out << "  logic [" << reg_width - 1 << ":0] state_next;\n\n";

  out << "  always_ff @(posedge " << f.clock_name << ") begin\n";
  out << "    if (" << f.reset_name << ") state <= S_" << f.reset_state << ";\n";
  out << "    else state <= state_next;\n";
  out << "  end\n\n";

  out << "  always_comb begin\n";
  out << "    state_next = state;\n";
  out << "    case (state)\n";
  for (const auto& [name, def] : f.states) {
    out << "      S_" << name << ": begin\n";
    if (def.transitions.empty()) {
      out << "        state_next = S_" << name << ";\n";
    } else {
      for (size_t e = 0; e < def.transitions.size(); ++e) {
        const Transition& t = def.transitions[e];
        out << "        " << (e == 0 ? "if" : "else if") << " (" << guard_sv(t.guard)
            << ") state_next = S_" << t.next << ";\n";
      }
      out << "        else state_next = S_" << name << ";\n";
    }
    out << "      end\n";
  }
  out << "      default: state_next = state;\n";
  out << "    endcase\n";
  out << "  end\n\n";

  const StateDef& reset_def = *f.find_state(f.reset_state);
  auto output_value = [&](const StateDef& def, const std::string& oname) {
    for (const auto& [n, v] : def.outputs)
      if (n == oname) return v;
    return uint64_t{0};
  };

  out << "  always_comb begin\n";
  out << "    case (state)\n";
  for (const auto& [name, def] : f.states) {
    out << "      S_" << name << ": begin\n";
    for (const auto& [oname, width] : f.outputs)
      out << "        " << oname << " = " << width << "'d" << output_value(def, oname) << ";\n";
    out << "      end\n";
  }
  out << "      default: begin\n";
  for (const auto& [oname, width] : f.outputs)
    out << "        " << oname << " = " << width << "'d" << output_value(reset_def, oname)
        << ";\n";
  out << "      end\n";
  out << "    endcase\n";
  out << "  end\n\n";
  out << "endmodule\n";
  return out.str();
}

std::string emit_testbench(const SemanticFsm& f, const Trace& golden) {
  const ValidationReport rep = validate_fsm(f);
  if (!rep.ok())
    throw ValidationError(rep, "cannot emit a testbench for an invalid FSM:\n" + rep.to_string());
  check_trace_interface(f, golden);

  std::ostringstream out;
  out << "// self-checking testbench for " << f.name << " (" << golden.rows.size()
      << " golden vectors)\n";
  out << "module " << f.name << "_tb;\n\n";
  out << "  logic " << f.clock_name << ";\n";
  out << "  logic " << f.reset_name << ";\n";
  for (const auto& in : f.inputs) out << "  logic " << in << ";\n";
  for (const auto& [name, width] : f.outputs)
    out << "  logic " << width_decl(width) << name << ";\n";
  out << "\n  " << f.name << " dut (\n";
  out << "    ." << f.clock_name << "(" << f.clock_name << "),\n";
  out << "    ." << f.reset_name << "(" << f.reset_name << ")";
  for (const auto& in : f.inputs) out << ",\n    ." << in << "(" << in << ")";
  for (const auto& [name, width] : f.outputs) out << ",\n    ." << name << "(" << name << ")";
  out << "\n  );\n\n";
  out << "  always #5 " << f.clock_name << " = ~" << f.clock_name << ";\n\n";
  out << "  initial begin\n";
  out << "    " << f.clock_name << " = 1'b0;\n";
  out << "    " << f.reset_name << " = 1'b1;\n";
  for (const auto& in : f.inputs) out << "    " << in << " = 1'b0;\n";
  out << "    @(posedge " << f.clock_name << ");\n";
  out << "    @(posedge " << f.clock_name << ");\n";
  out << "    #1;\n";
  out << "    " << f.reset_name << " = 1'b0;\n";

  for (size_t t = 0; t < golden.rows.size(); ++t) {
    const TraceRow& row = golden.rows[t];
    out << "    // cycle " << t << "\n";
    for (const auto& in : f.inputs)
      out << "    " << in << " = 1'b" << row.inputs.at(in) << ";\n";
    out << "    #8;\n";
    for (const auto& [name, width] : f.outputs) {
      const uint64_t expect = row.outputs.at(name);
      out << "    if (" << name << " !== " << width << "'d" << expect << ") begin\n";
      out << "      $display(\"" << kFailSentinel << " cycle=" << t << " signal=" << name
          << " expect=" << expect << " got=%0d\", " << name << ");\n";
      out << "      $finish;\n";
      out << "    end\n";
    }
    out << "    #2;\n";
  }
  out << "    $display(\"" << kPassSentinel << "\");\n";
  out << "    $finish;\n";
  out << "  end\n\n";
  out << "endmodule\n";
  return out.str();
}

std::string emit_miter(const SemanticFsm& a, const SemanticFsm& b) {
  {
    const std::set<std::string> ia(a.inputs.begin(), a.inputs.end());
    const std::set<std::string> ib(b.inputs.begin(), b.inputs.end());
    const std::map<std::string, int> oa(a.outputs.begin(), a.outputs.end());
    const std::map<std::string, int> ob(b.outputs.begin(), b.outputs.end());
    if (ia != ib || oa != ob)
      throw InterfaceError("miter requires identical I/O interfaces");
  }

  const bool collide = a.name == b.name;
  const std::string a_mod = collide ? a.name + "_ref" : a.name;
  const std::string b_mod = collide ? b.name + "_rec" : b.name;

  std::ostringstream out;
  out << emit_rtl(a, StateEncoding::OneHot, a_mod) << "\n";
  out << emit_rtl(b, StateEncoding::OneHot, b_mod) << "\n";

  out << "// sequential miter: mismatch = OR of per-output inequalities\n";
  out << "module miter (\n";
  out << "  input  logic " << a.clock_name << ",\n";
  out << "  input  logic " << a.reset_name;
  for (const auto& in : a.inputs) out << ",\n  input  logic " << in;
  out << ",\n  output logic mismatch\n);\n\n";

  for (const auto& [name, width] : a.outputs) {
    out << "  logic " << width_decl(width) << "ref_" << name << ";\n";
    out << "  logic " << width_decl(width) << "rec_" << name << ";\n";
  }

  auto instantiate = [&](const SemanticFsm& f, const std::string& mod, const std::string& inst,
                         const std::string& prefix) {
    out << "\n  " << mod << " " << inst << " (\n";
    out << "    ." << f.clock_name << "(" << a.clock_name << "),\n";
    out << "    ." << f.reset_name << "(" << a.reset_name << ")";
    for (const auto& in : f.inputs) out << ",\n    ." << in << "(" << in << ")";
    for (const auto& [name, width] : f.outputs)
      out << ",\n    ." << name << "(" << prefix << name << ")";
    out << "\n  );\n";
  };
  instantiate(a, a_mod, "u_ref", "ref_");
  instantiate(b, b_mod, "u_rec", "rec_");

  out << "\n  assign mismatch =";
  bool first = true;
  for (const auto& [name, width] : a.outputs) {
    out << (first ? " " : " |\n                    ") << "(ref_" << name << " != rec_" << name
        << ")";
    first = false;
  }
  if (first) out << " 1'b0";
  out << ";\n\n";
  out << "endmodule\n";
  return out.str();
}

}  // namespace fsmforge
