// SPDX-License-Identifier: Apache-2.0
#include "fsmforge/yaml_io.hpp"

#include <yaml-cpp/yaml.h>

#include <set>
#include <sstream>

#include "fsmforge/guard.hpp"

namespace fsmforge {

namespace {

[[noreturn]] void missing(const std::string& path) {
  throw YamlError("MISSING_FIELD", "MISSING_FIELD " + path);
}

[[noreturn]] void wrong_type(const std::string& path, const std::string& want) {
  throw YamlError("WRONG_TYPE", "WRONG_TYPE " + path + ": expected " + want);
}

void check_keys(const YAML::Node& map, const std::string& path,
                const std::set<std::string>& allowed) {
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw YamlError("UNKNOWN_KEY", "UNKNOWN_KEY " + (path.empty() ? key : path + "." + key));
  }
}

std::string scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) wrong_type(path, "scalar");
  return n.as<std::string>();
}

int int_scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) wrong_type(path, "integer");
  try {
    return n.as<int>();
  } catch (const YAML::Exception&) {
    wrong_type(path, "integer");
  }
}

uint64_t uint_scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) wrong_type(path, "unsigned integer");
  try {
    return n.as<uint64_t>();
  } catch (const YAML::Exception&) {
    wrong_type(path, "unsigned integer");
  }
}

Guard guard_scalar(const YAML::Node& n, const std::string& path) {
  const std::string text = scalar(n, path);
  try {
    return parse_guard(text);
  } catch (const GuardParseError& e) {
    throw YamlError("BAD_VALUE",
                    "BAD_VALUE " + path + ": " + e.what() + " (expected " + e.expected + ")");
  }
}

StateDef parse_state(const YAML::Node& node, const std::string& path,
                     const std::vector<std::pair<std::string, int>>& declared_outputs) {
  if (!node.IsMap()) wrong_type(path, "map");
  check_keys(node, path, {"outputs", "transitions"});

  StateDef def;
  std::vector<std::pair<std::string, uint64_t>> raw;
  if (const YAML::Node outs = node["outputs"]) {
    if (!outs.IsMap()) wrong_type(path + ".outputs", "map");
    for (const auto& kv : outs)
      raw.emplace_back(kv.first.as<std::string>(),
                       uint_scalar(kv.second, path + ".outputs." + kv.first.as<std::string>()));
  }
  // normalize to declared output order so reserialization is canonical
  for (const auto& [name, width] : declared_outputs)
    for (auto& [rname, rvalue] : raw)
      if (rname == name) {
        def.outputs.emplace_back(rname, rvalue);
        break;
      }
  for (auto& [rname, rvalue] : raw) {
    bool declared = false;
    for (const auto& [name, width] : declared_outputs)
      if (rname == name) declared = true;
    if (!declared) def.outputs.emplace_back(rname, rvalue);  // validate_fsm flags it
  }

  if (const YAML::Node trans = node["transitions"]) {
    if (!trans.IsSequence()) wrong_type(path + ".transitions", "sequence");
    int idx = 0;
    for (const auto& t : trans) {
      const std::string tpath = path + ".transitions[" + std::to_string(idx++) + "]";
      if (!t.IsMap()) wrong_type(tpath, "map");
      check_keys(t, tpath, {"guard", "next"});
      if (!t["guard"]) missing(tpath + ".guard");
      if (!t["next"]) missing(tpath + ".next");
      def.transitions.push_back(
          {guard_scalar(t["guard"], tpath + ".guard"), scalar(t["next"], tpath + ".next")});
    }
  }
  return def;
}

}  // namespace

SemanticFsm parse_fsm_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw YamlError("SYNTAX", "SYNTAX " + e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw YamlError("WRONG_TYPE", "WRONG_TYPE document: expected map");
  check_keys(root, "", {"name", "clock", "reset", "inputs", "outputs", "states"});

  SemanticFsm f;
  if (!root["name"]) missing("name");
  f.name = scalar(root["name"], "name");
  f.clock_name = root["clock"] ? scalar(root["clock"], "clock") : "clk";

  const YAML::Node reset = root["reset"];
  if (!reset) missing("reset");
  if (!reset.IsMap()) wrong_type("reset", "map");
  check_keys(reset, "reset", {"signal", "kind", "active", "state"});
  if (!reset["signal"]) missing("reset.signal");
  f.reset_name = scalar(reset["signal"], "reset.signal");
  if (!reset["state"]) missing("reset.state");
  f.reset_state = scalar(reset["state"], "reset.state");
  if (reset["kind"] && scalar(reset["kind"], "reset.kind") != "synchronous")
    throw YamlError("BAD_VALUE", "BAD_VALUE reset.kind: only 'synchronous' is supported");
  if (reset["active"] && scalar(reset["active"], "reset.active") != "high")
    throw YamlError("BAD_VALUE", "BAD_VALUE reset.active: only 'high' is supported");

  const YAML::Node inputs = root["inputs"];
  if (!inputs) missing("inputs");
  if (!inputs.IsSequence()) wrong_type("inputs", "sequence");
  for (const auto& in : inputs) f.inputs.push_back(scalar(in, "inputs[]"));

  const YAML::Node outputs = root["outputs"];
  if (!outputs) missing("outputs");
  if (!outputs.IsMap()) wrong_type("outputs", "map");
  for (const auto& kv : outputs)
    f.outputs.emplace_back(kv.first.as<std::string>(),
                           int_scalar(kv.second, "outputs." + kv.first.as<std::string>()));

  const YAML::Node states = root["states"];
  if (!states) missing("states");
  if (!states.IsMap()) wrong_type("states", "map");
  for (const auto& kv : states) {
    const std::string name = kv.first.as<std::string>();
    f.states.emplace_back(name, parse_state(kv.second, "states." + name, f.outputs));
  }

  const ValidationReport rep = validate_fsm(f);
  if (!rep.ok())
    throw ValidationError(rep, "invalid FSM document:\n" + rep.to_string());
  return f;
}

std::string serialize_fsm_yaml(const SemanticFsm& f) {
  const ValidationReport rep = validate_fsm(f);
  if (!rep.ok()) throw ValidationError(rep, "cannot serialize invalid FSM:\n" + rep.to_string());

  std::ostringstream out;
  out << "name: " << f.name << "\n";
  out << "clock: " << f.clock_name << "\n";
  out << "reset: {signal: " << f.reset_name << ", kind: synchronous, active: high, state: "
      << f.reset_state << "}\n";

  out << "inputs: [";
  for (size_t i = 0; i < f.inputs.size(); ++i) out << (i ? ", " : "") << f.inputs[i];
  out << "]\n";

  out << "outputs: {";
  for (size_t i = 0; i < f.outputs.size(); ++i)
    out << (i ? ", " : "") << f.outputs[i].first << ": " << f.outputs[i].second;
  out << "}\n";

  if (f.states.empty()) {
    out << "states: {}\n";
    return out.str();
  }
  out << "states:\n";
  for (const auto& [name, def] : f.states) {
    out << "  " << name << ":\n";
    out << "    outputs: {";
    bool first = true;
    for (const auto& [oname, width] : f.outputs) {
      for (const auto& [sname, value] : def.outputs)
        if (sname == oname) {
          out << (first ? "" : ", ") << oname << ": " << value;
          first = false;
          break;
        }
    }
    out << "}\n";
    if (def.transitions.empty()) {
      out << "    transitions: []\n";
      continue;
    }
    out << "    transitions:\n";
    for (const Transition& t : def.transitions)
      out << "      - {guard: \"" << print_guard(t.guard) << "\", next: " << t.next << "}\n";
  }
  return out.str();
}

}  // namespace fsmforge
