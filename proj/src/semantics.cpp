// SPDX-License-Identifier: Apache-2.0
#include "fsmforge/semantics.hpp"

#include <algorithm>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "fsmforge/yaml_io.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace fsmforge {

InterfaceSignature InterfaceSignature::of(const SemanticFsm& f) {
  return {f.name, f.clock_name, f.reset_name, f.reset_state, f.inputs, f.outputs};
}

int count_words(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  int n = 0;
  while (in >> word) ++n;
  return n;
}

std::string expand_prompt(const std::string& tmpl,
                          const std::vector<std::pair<std::string, std::string>>& slots) {
  std::string out = tmpl;
  for (const auto& [key, value] : slots) {
    const std::string token = "{" + key + "}";
    for (size_t pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos))
      out.replace(pos, token.size(), value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mock provider

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

std::string hex16(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 0xf];
  return out;
}

Guard selector_literal(int bit_index, bool positive) {
  Guard v = Guard::variable("sel_" + std::to_string(bit_index));
  return positive ? v : Guard::negate(std::move(v));
}

std::string width_words(int w) { return std::to_string(w) + (w == 1 ? " bit" : " bits"); }

}  // namespace

AssignedSemantics mock_assign_semantics(const AbstractGraph& g, uint64_t seed) {
  std::map<int, int> phase_of;  // state id -> phase index
  std::map<int, int> idx_in_phase;
  std::set<int> exits;
  for (size_t pi = 0; pi < g.phases.size(); ++pi) {
    for (size_t mi = 0; mi < g.phases[pi].members.size(); ++mi) {
      phase_of[g.phases[pi].members[mi]] = static_cast<int>(pi);
      idx_in_phase[g.phases[pi].members[mi]] = static_cast<int>(mi);
    }
    exits.insert(g.phases[pi].exit);
  }

  StateMapping mapping;
  for (const int s : g.states) {
    if (s == g.reset_state)
      mapping.pairs[s] = "INIT";
    else if (phase_of.count(s))
      mapping.pairs[s] = "P" + std::to_string(phase_of.at(s)) + "_S" +
                         std::to_string(idx_in_phase.at(s));
    else
      mapping.pairs[s] = "S" + std::to_string(s);  // orphan states of hand-built graphs
  }

  std::map<int, std::vector<int>> out_edges;  // sorted by target id via set order
  for (const auto& [u, v] : g.edges) out_edges[u].push_back(v);

  int sel_bits = 0;
  for (const auto& [u, targets] : out_edges)
    if (targets.size() >= 2) sel_bits = std::max(sel_bits, clog2(targets.size()));

  SemanticFsm f;
  f.name = "fsm_" + hex16(seed);
  f.inputs.push_back("go");
  for (int i = 0; i < sel_bits; ++i) f.inputs.push_back("sel_" + std::to_string(i));

  const int phase_width = clog2(g.phases.size() + 1);
  f.outputs = {{"phase_id", std::max(1, phase_width)}, {"at_exit", 1}};

  for (const int s : g.states) {
    StateDef def;
    const uint64_t phase_value = s == g.reset_state || !phase_of.count(s)
                                     ? 0
                                     : static_cast<uint64_t>(phase_of.at(s)) + 1;
    def.outputs = {{"phase_id", phase_value}, {"at_exit", exits.count(s) ? uint64_t{1} : 0}};

    const auto it = out_edges.find(s);
    if (it != out_edges.end()) {
      const auto& targets = it->second;
      if (targets.size() == 1) {
        def.transitions.push_back({Guard::variable("go"), mapping.pairs.at(targets[0])});
      } else {
        const int bits = clog2(targets.size());
        for (size_t j = 0; j < targets.size(); ++j) {
          std::vector<Guard> literals;
          for (int b = 0; b < bits; ++b) literals.push_back(selector_literal(b, (j >> b) & 1));
          def.transitions.push_back({Guard::conj(std::move(literals)),
                                     mapping.pairs.at(targets[j])});
        }
      }
    }
    f.states.emplace_back(mapping.pairs.at(s), std::move(def));
  }
  f.reset_state = mapping.pairs.at(g.reset_state);

  std::ostringstream story;
  story << "A staged controller with " << g.phases.size() << " phase(s) over "
        << g.states.size() << " states. After reset it idles in INIT until go is asserted, "
        << "then walks the phase chain; the sel lines steer branching states and phase_id/"
        << "at_exit expose progress.";
  return {std::move(f), std::move(mapping), story.str()};
}

SpecDocument mock_spec_from_fsm(const SemanticFsm& f) {
  std::ostringstream io;
  io << "# Module " << f.name << "\n\n";
  io << "## Inputs and Outputs\n\n";
  io << "- clock: " << f.clock_name << "\n";
  io << "- reset: " << f.reset_name << " (synchronous, active high); reset state: "
     << f.reset_state << "\n";
  for (const auto& in : f.inputs) io << "- input " << in << ": 1 bit\n";
  for (const auto& [name, width] : f.outputs)
    io << "- output " << name << ": " << width_words(width) << "\n";

  std::ostringstream req;
  req << "## Requirements\n\n";
  int r = 1;
  for (const auto& [name, def] : f.states) {
    req << "R" << r++ << ". In state " << name << " the machine drives ";
    if (def.outputs.empty()) {
      req << "no outputs";
    } else {
      bool first = true;
      for (const auto& [oname, value] : def.outputs) {
        req << (first ? "" : " and ") << oname << " = " << value;
        first = false;
      }
    }
    req << ". When in state " << name << ", ";
    if (def.transitions.empty()) {
      req << "the machine holds.";
    } else {
      for (size_t e = 0; e < def.transitions.size(); ++e)
        req << (e == 0 ? "if " : "; else if ") << print_guard(def.transitions[e].guard)
            << ", the machine moves to " << def.transitions[e].next;
      req << "; otherwise it holds.";
    }
    req << "\n";
  }

  SpecDocument doc;
  doc.io_section = io.str();
  doc.requirements_section = req.str();
  doc.word_count = count_words(doc.text());
  return doc;
}

namespace {

[[noreturn]] void recon_fail(const std::string& what) {
  throw ReconstructionError("spec reconstruction failed: " + what);
}

// consumes `prefix` from the front of `s` or fails
std::string expect_prefix(const std::string& s, const std::string& prefix,
                          const std::string& what) {
  if (s.rfind(prefix, 0) != 0) recon_fail("expected " + what + " in '" + s + "'");
  return s.substr(prefix.size());
}

std::vector<std::string> non_empty_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

SemanticFsm mock_fsm_from_spec(const SpecDocument& spec, const StateMapping& mapping,
                               const InterfaceSignature& iface) {
  SemanticFsm f;

  const auto io_lines = non_empty_lines(spec.io_section);
  size_t li = 0;
  if (io_lines.empty()) recon_fail("empty IO section");
  f.name = expect_prefix(io_lines[li++], "# Module ", "module header");
  if (li >= io_lines.size() || io_lines[li] != "## Inputs and Outputs")
    recon_fail("missing '## Inputs and Outputs' header");
  ++li;
  if (li >= io_lines.size()) recon_fail("missing clock line");
  f.clock_name = expect_prefix(io_lines[li++], "- clock: ", "clock line");
  if (li >= io_lines.size()) recon_fail("missing reset line");
  {
    const std::string rest = expect_prefix(io_lines[li++], "- reset: ", "reset line");
    const std::string marker = " (synchronous, active high); reset state: ";
    const size_t at = rest.find(marker);
    if (at == std::string::npos) recon_fail("malformed reset line");
    f.reset_name = rest.substr(0, at);
    f.reset_state = rest.substr(at + marker.size());
  }
  for (; li < io_lines.size(); ++li) {
    const std::string& line = io_lines[li];
    const bool is_input = line.rfind("- input ", 0) == 0;
    const bool is_output = line.rfind("- output ", 0) == 0;
    if (!is_input && !is_output) recon_fail("unexpected IO line '" + line + "'");
    const std::string rest = line.substr(is_input ? 8 : 9);
    const size_t colon = rest.find(": ");
    if (colon == std::string::npos) recon_fail("malformed signal line '" + line + "'");
    const std::string name = rest.substr(0, colon);
    const std::string width_text = rest.substr(colon + 2);
    int width = 0;
    try {
      width = std::stoi(width_text);
    } catch (const std::exception&) {
      recon_fail("bad width in '" + line + "'");
    }
    if (is_input) {
      if (width != 1) recon_fail("inputs must be 1 bit");
      f.inputs.push_back(name);
    } else {
      f.outputs.emplace_back(name, width);
    }
  }

  const auto req_lines = non_empty_lines(spec.requirements_section);
  if (req_lines.empty() || req_lines[0] != "## Requirements")
    recon_fail("missing '## Requirements' header");
  if (req_lines.size() == 1) recon_fail("empty requirements section");
  for (size_t ri = 1; ri < req_lines.size(); ++ri) {
    std::string line = req_lines[ri];
    if (line.empty() || line[0] != 'R') recon_fail("requirement must start with R<k>.");
    size_t dot = line.find(". ");
    if (dot == std::string::npos) recon_fail("malformed requirement '" + line + "'");
    line = line.substr(dot + 2);

    const std::string drives_marker = " the machine drives ";
    const std::string when_marker = ". When in state ";
    const std::string state_name =
        expect_prefix(line.substr(0, line.find(drives_marker)), "In state ", "state clause");
    const size_t when_at = line.find(when_marker);
    if (when_at == std::string::npos) recon_fail("missing When clause in '" + line + "'");
    const size_t drives_at = line.find(drives_marker);
    if (drives_at == std::string::npos || drives_at > when_at)
      recon_fail("missing drives clause in '" + line + "'");

    StateDef def;
    const std::string outs = line.substr(drives_at + drives_marker.size(),
                                         when_at - drives_at - drives_marker.size());
    if (outs != "no outputs") {
      size_t pos = 0;
      while (pos <= outs.size()) {
        size_t next = outs.find(" and ", pos);
        const std::string item =
            outs.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        const size_t eq = item.find(" = ");
        if (eq == std::string::npos) recon_fail("malformed output assignment '" + item + "'");
        try {
          def.outputs.emplace_back(item.substr(0, eq), std::stoull(item.substr(eq + 3)));
        } catch (const std::exception&) {
          recon_fail("bad output value in '" + item + "'");
        }
        if (next == std::string::npos) break;
        pos = next + 5;
      }
    }

    std::string trans = line.substr(when_at + when_marker.size());
    const std::string lead = state_name + ", ";
    trans = expect_prefix(trans, lead, "matching state in When clause");
    if (trans.empty() || trans.back() != '.') recon_fail("requirement must end with a period");
    trans.pop_back();

    if (trans != "the machine holds") {
      // "if g, the machine moves to T" ("; else if g, ...")* "; otherwise it holds"
      std::vector<std::string> clauses;
      size_t pos = 0;
      while (pos <= trans.size()) {
        size_t next = trans.find("; ", pos);
        clauses.push_back(
            trans.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos) break;
        pos = next + 2;
      }
      if (clauses.size() < 2 || clauses.back() != "otherwise it holds")
        recon_fail("transition clause list must end with 'otherwise it holds'");
      for (size_t ci = 0; ci + 1 < clauses.size(); ++ci) {
        std::string clause = clauses[ci];
        clause = expect_prefix(clause, ci == 0 ? "if " : "else if ", "transition clause");
        const std::string moves_marker = ", the machine moves to ";
        const size_t at = clause.find(moves_marker);
        if (at == std::string::npos) recon_fail("malformed transition '" + clause + "'");
        Guard g;
        try {
          g = parse_guard(clause.substr(0, at));
        } catch (const GuardParseError& e) {
          recon_fail(std::string("guard: ") + e.what());
        }
        def.transitions.push_back({std::move(g), clause.substr(at + moves_marker.size())});
      }
    }
    f.states.emplace_back(state_name, std::move(def));
  }

  const ValidationReport rep = validate_fsm(f);
  if (!rep.ok()) recon_fail("reconstructed machine is invalid:\n" + rep.to_string());
  if (InterfaceSignature::of(f) != iface)
    recon_fail("reconstructed interface differs from the expected signature");

  std::set<std::string> image, states;
  for (const auto& [id, name] : mapping.pairs) image.insert(name);
  for (const auto& [name, def] : f.states) states.insert(name);
  if (image != states) recon_fail("state mapping does not cover the reconstructed states");

  return f;
}

// ---------------------------------------------------------------------------
// LLM provider

namespace {

const char* kDefaultAssignPrompt = R"(You are designing a hardware controller. Below is the
structure of a finite-state machine: its phases and the exact directed edge list over
numbered states. Choose a realistic hardware scenario, give every state a descriptive
name, and design the input and output signals.

Phases:
{PHASES}

Edges:
{EDGE_LIST}

Reply with exactly three parts:
1. a fenced ```yaml block with the machine (keys: name, clock, reset, inputs, outputs,
   states; per state: outputs and an ordered list of {guard, next} transitions whose
   connectivity follows the edge list exactly; guards use only & | ! ( ) over input names),
2. a fenced ```json block mapping each numbered state to its name, e.g. {"0": "IDLE"},
3. a short story of the workflow in plain prose.
)";

const char* kDefaultSpecPrompt = R"(Write a natural-language hardware specification for the
machine below. Use exactly two markdown sections: '## Inputs and Outputs', listing every
signal by its exact name and width, and '## Requirements', paraphrasing each state's
outputs and each group of transitions into requirements, in priority order. Hide nothing;
every transition must be recoverable from your text.

```yaml
{YAML}
```
)";

const char* kDefaultReconPrompt = R"(Reconstruct the machine described by this specification
as YAML (keys: name, clock, reset, inputs, outputs, states; per state: outputs and an
ordered list of {guard, next} transitions). Use the exact state names from the mapping and
the exact signal names from the interface. Reply with one fenced ```yaml block only.

Specification:
{SPEC}

State mapping:
{STATE_MAPPING}

Interface:
{INTERFACE}
)";

std::optional<std::string> extract_fenced(const std::string& text, const std::string& lang) {
  for (const std::string& opener : {"```" + lang + "\n", "```" + lang + "\r\n"}) {
    const size_t start = text.find(opener);
    if (start == std::string::npos) continue;
    const size_t body = start + opener.size();
    const size_t end = text.find("```", body);
    if (end == std::string::npos) continue;
    return text.substr(body, end - body);
  }
  return std::nullopt;
}

std::string strip_fences(const std::string& text) {
  std::string out;
  size_t pos = 0;
  while (pos < text.size()) {
    const size_t open = text.find("```", pos);
    if (open == std::string::npos) {
      out += text.substr(pos);
      break;
    }
    out += text.substr(pos, open - pos);
    const size_t close = text.find("```", open + 3);
    if (close == std::string::npos) break;
    pos = close + 3;
  }
  // trim
  const size_t b = out.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const size_t e = out.find_last_not_of(" \t\r\n");
  return out.substr(b, e - b + 1);
}

}  // namespace

struct LlmProvider::Impl {
  LlmConfig cfg;
  ChatTransport transport;

  std::mutex slot_mutex;
  std::condition_variable slot_cv;
  int in_flight = 0;

  std::mutex log_mutex;
  std::map<std::string, int> log_seq;  // per-context sequence numbers

  explicit Impl(LlmConfig c, ChatTransport t) : cfg(std::move(c)), transport(std::move(t)) {
    if (cfg.prompt_assign.empty()) cfg.prompt_assign = kDefaultAssignPrompt;
    if (cfg.prompt_spec.empty()) cfg.prompt_spec = kDefaultSpecPrompt;
    if (cfg.prompt_recon.empty()) cfg.prompt_recon = kDefaultReconPrompt;
    if (!transport) transport = make_http_transport();
  }

  ChatTransport make_http_transport() {
    return [this](const nlohmann::json& request) -> std::string {
      const size_t scheme_end = cfg.endpoint.find("://");
      if (scheme_end == std::string::npos)
        throw ProviderError(ProviderErrorCode::Network,
                            "endpoint must be an http(s) URL: " + cfg.endpoint);
      const size_t path_at = cfg.endpoint.find('/', scheme_end + 3);
      const std::string base =
          path_at == std::string::npos ? cfg.endpoint : cfg.endpoint.substr(0, path_at);
      const std::string prefix =
          path_at == std::string::npos ? "" : cfg.endpoint.substr(path_at);

      httplib::Client client(base);
      client.set_read_timeout(120, 0);
      httplib::Headers headers;
      if (const char* token = std::getenv(cfg.token_env.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);

      const auto res =
          client.Post(prefix + "/chat/completions", headers, request.dump(), "application/json");
      if (!res)
        throw ProviderError(ProviderErrorCode::Network,
                            "network failure: " + httplib::to_string(res.error()));
      if (res->status == 401 || res->status == 403)
        throw ProviderError(ProviderErrorCode::Auth,
                            "authentication failed (" + std::to_string(res->status) + ")");
      if (res->status != 200)
        throw ProviderError(ProviderErrorCode::Protocol,
                            "unexpected status " + std::to_string(res->status));
      return res->body;
    };
  }

  void log(const std::string& context, const std::string& kind, const nlohmann::json& request,
           const std::string& response) {
    if (cfg.provenance_dir.empty()) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    std::filesystem::create_directories(cfg.provenance_dir);
    const std::string file =
        cfg.provenance_dir + "/" + context + "_" + std::to_string(log_seq[context]++) + ".json";
    nlohmann::json entry{{"kind", kind}, {"request", request}, {"response", response}};
    std::ofstream(file) << entry.dump(2) << "\n";
  }

  // One chat turn; returns the assistant content. Network/auth/token-budget
  // errors surface immediately, malformed bodies raise Protocol.
  std::string chat(const std::string& context, const std::string& kind,
                   const std::string& prompt) {
    nlohmann::json request{{"model", cfg.model},
                           {"messages", {{{"role", "user"}, {"content", prompt}}}}};
    {
      std::unique_lock<std::mutex> lock(slot_mutex);
      slot_cv.wait(lock, [&] { return in_flight < cfg.request_cap; });
      ++in_flight;
    }
    std::string body;
    try {
      body = transport(request);
    } catch (...) {
      {
        std::lock_guard<std::mutex> lock(slot_mutex);
        --in_flight;
      }
      slot_cv.notify_one();
      log(context, kind, request, "<transport error>");
      throw;
    }
    {
      std::lock_guard<std::mutex> lock(slot_mutex);
      --in_flight;
    }
    slot_cv.notify_one();
    log(context, kind, request, body);

    nlohmann::json response;
    try {
      response = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
      throw ProviderError(ProviderErrorCode::Protocol, "response body is not JSON");
    }
    try {
      const auto& choice = response.at("choices").at(0);
      if (choice.contains("finish_reason") && choice.at("finish_reason") == "length")
        throw ProviderError(ProviderErrorCode::TokenBudget,
                            "model output hit the token budget");
      return choice.at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ProviderError(ProviderErrorCode::Protocol, "response is missing choices[0].message");
    }
  }

  // Runs the parse step with retries on malformed content.
  template <typename Fn>
  auto with_retries(const std::string& context, const std::string& kind,
                    const std::string& prompt, Fn parse) {
    std::string last_error = "no attempts made";
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
      std::string content;
      try {
        content = chat(context, kind, prompt);
      } catch (const ProviderError& e) {
        if (e.code == ProviderErrorCode::Protocol && attempt < cfg.max_retries) {
          last_error = e.what();
          continue;
        }
        throw;
      }
      try {
        return parse(content);
      } catch (const std::exception& e) {
        last_error = e.what();
      }
    }
    throw ProviderError(ProviderErrorCode::Unparseable,
                        "unparseable response after " + std::to_string(cfg.max_retries + 1) +
                            " attempt(s): " + last_error);
  }
};

LlmProvider::LlmProvider(LlmConfig cfg, ChatTransport transport)
    : impl_(std::make_shared<Impl>(std::move(cfg), std::move(transport))) {}

LlmProvider::LlmProvider(std::shared_ptr<Impl> shared) : impl_(std::move(shared)) {}

LlmProvider::~LlmProvider() = default;

void LlmProvider::begin_problem(const std::string& id, uint64_t) { context_ = id; }

std::unique_ptr<SemanticsProvider> LlmProvider::clone() const {
  return std::unique_ptr<SemanticsProvider>(new LlmProvider(impl_));
}

AssignedSemantics LlmProvider::assign_semantics(const AbstractGraph& g) {
  std::ostringstream phases, edges;
  for (size_t pi = 0; pi < g.phases.size(); ++pi) {
    phases << "phase " << pi << ": entry " << g.phases[pi].entry << ", exit "
           << g.phases[pi].exit << ", members [";
    for (size_t mi = 0; mi < g.phases[pi].members.size(); ++mi)
      phases << (mi ? ", " : "") << g.phases[pi].members[mi];
    phases << "]\n";
  }
  phases << "reset state: " << g.reset_state << "\n";
  for (const auto& [u, v] : g.edges) edges << u << " -> " << v << "\n";

  const std::string prompt = expand_prompt(
      impl_->cfg.prompt_assign, {{"PHASES", phases.str()}, {"EDGE_LIST", edges.str()}});

  return impl_->with_retries(context_, "assign_semantics", prompt,
                             [&](const std::string& content) -> AssignedSemantics {
    const auto yaml = extract_fenced(content, "yaml");
    if (!yaml) throw ReconstructionError("no fenced yaml block in response");
    const auto mapping_json = extract_fenced(content, "json");
    if (!mapping_json) throw ReconstructionError("no fenced json mapping block in response");

    AssignedSemantics out;
    out.fsm = parse_fsm_yaml(*yaml);
    const auto j = nlohmann::json::parse(*mapping_json);
    for (const auto& [key, value] : j.items())
      out.mapping.pairs[std::stoi(key)] = value.get<std::string>();
    out.story = strip_fences(content);
    return out;
  });
}

SpecDocument LlmProvider::spec_from_fsm(const SemanticFsm& f) {
  const std::string prompt =
      expand_prompt(impl_->cfg.prompt_spec, {{"YAML", serialize_fsm_yaml(f)}});
  return impl_->with_retries(context_, "spec_from_fsm", prompt,
                             [&](const std::string& content) -> SpecDocument {
    const size_t io_at = content.find("## Inputs and Outputs");
    const size_t req_at = content.find("## Requirements");
    if (io_at == std::string::npos || req_at == std::string::npos || req_at < io_at)
      throw ReconstructionError("response lacks the required section headers");
    SpecDocument doc;
    const size_t head = content.rfind("# Module", io_at);
    const size_t start = head == std::string::npos ? io_at : head;
    doc.io_section = content.substr(start, req_at - start);
    doc.requirements_section = content.substr(req_at);
    doc.word_count = count_words(doc.text());
    for (const auto& in : f.inputs)
      if (doc.io_section.find(in) == std::string::npos)
        throw ReconstructionError("IO section does not mention input '" + in + "'");
    for (const auto& [name, width] : f.outputs)
      if (doc.io_section.find(name) == std::string::npos)
        throw ReconstructionError("IO section does not mention output '" + name + "'");
    return doc;
  });
}

SemanticFsm LlmProvider::fsm_from_spec(const SpecDocument& spec, const StateMapping& mapping,
                                       const InterfaceSignature& iface) {
  nlohmann::json mapping_json;
  for (const auto& [id, name] : mapping.pairs) mapping_json[std::to_string(id)] = name;
  std::ostringstream iface_text;
  iface_text << "module " << iface.name << "; clock " << iface.clock << "; reset "
             << iface.reset_signal << " (reset state " << iface.reset_state << "); inputs:";
  for (const auto& in : iface.inputs) iface_text << " " << in;
  iface_text << "; outputs:";
  for (const auto& [name, width] : iface.outputs) iface_text << " " << name << "[" << width << "]";

  const std::string prompt = expand_prompt(impl_->cfg.prompt_recon,
                                           {{"SPEC", spec.text()},
                                            {"STATE_MAPPING", mapping_json.dump()},
                                            {"INTERFACE", iface_text.str()}});

  return impl_->with_retries(context_, "fsm_from_spec", prompt,
                             [&](const std::string& content) -> SemanticFsm {
    const auto yaml = extract_fenced(content, "yaml");
    if (!yaml) throw ReconstructionError("no fenced yaml block in response");
    SemanticFsm f = parse_fsm_yaml(*yaml);
    if (InterfaceSignature::of(f) != iface)
      throw ReconstructionError("reconstructed interface differs from the expected signature");
    return f;
  });
}

}  // namespace fsmforge
