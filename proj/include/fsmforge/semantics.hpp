// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fsmforge/core.hpp"
#include "json.hpp"

namespace fsmforge {

/// Natural-language problem statement: signal inventory plus one requirement
/// per state.
struct SpecDocument {
  std::string io_section;            // lists every signal by exact name
  std::string requirements_section;  // ordered requirement paragraphs
  int word_count = 0;

  std::string text() const { return io_section + "\n" + requirements_section; }

  bool operator==(const SpecDocument&) const = default;
};

struct InterfaceSignature {
  std::string name;
  std::string clock;
  std::string reset_signal;
  std::string reset_state;
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, int>> outputs;

  static InterfaceSignature of(const SemanticFsm& f);

  bool operator==(const InterfaceSignature&) const = default;
};

struct AssignedSemantics {
  SemanticFsm fsm;
  StateMapping mapping;
  std::string story;
};

/// Turns abstract graphs into semantic machines and machines into
/// specifications and back. Implementations must be safe for concurrent
/// calls on distinct problems.
class SemanticsProvider {
 public:
  virtual ~SemanticsProvider() = default;

  virtual AssignedSemantics assign_semantics(const AbstractGraph& g) = 0;
  virtual SpecDocument spec_from_fsm(const SemanticFsm& f) = 0;
  virtual SemanticFsm fsm_from_spec(const SpecDocument& spec, const StateMapping& mapping,
                                    const InterfaceSignature& iface) = 0;

  /// Called by the pipeline before each attempt; providers may use the id for
  /// provenance and the seed for deterministic naming.
  virtual void begin_problem(const std::string& /*id*/, uint64_t /*seed*/) {}

  /// Independent handle for one worker; clones may share transports and
  /// rate limits but never per-problem state.
  virtual std::unique_ptr<SemanticsProvider> clone() const = 0;
};

class ReconstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic mock provider (hermetic testing and curation)

/// Names states P<phase>_S<idx> (reset INIT), declares a `go` input plus the
/// selector bits needed for the widest fan-out, guards edge j of a state on
/// the minterm encoding j, and outputs the owning phase id and an exit flag.
/// Every explicit edge is priority-feasible and check_isomorphism passes
/// against g by construction.
AssignedSemantics mock_assign_semantics(const AbstractGraph& g, uint64_t seed);

/// Rigid, injective template with one requirement sentence per state;
/// machine-parseable by mock_fsm_from_spec.
SpecDocument mock_spec_from_fsm(const SemanticFsm& f);

/// Inverse of the template; throws ReconstructionError on any deviation and
/// cross-checks the declared interface and state mapping.
SemanticFsm mock_fsm_from_spec(const SpecDocument& spec, const StateMapping& mapping,
                               const InterfaceSignature& iface);

class MockProvider : public SemanticsProvider {
 public:
  explicit MockProvider(uint64_t seed = 0) : seed_(seed) {}

  AssignedSemantics assign_semantics(const AbstractGraph& g) override {
    return mock_assign_semantics(g, seed_);
  }
  SpecDocument spec_from_fsm(const SemanticFsm& f) override { return mock_spec_from_fsm(f); }
  SemanticFsm fsm_from_spec(const SpecDocument& spec, const StateMapping& mapping,
                            const InterfaceSignature& iface) override {
    return mock_fsm_from_spec(spec, mapping, iface);
  }
  void begin_problem(const std::string&, uint64_t seed) override { seed_ = seed; }
  std::unique_ptr<SemanticsProvider> clone() const override {
    return std::make_unique<MockProvider>(seed_);
  }

 private:
  uint64_t seed_;
};

// ---------------------------------------------------------------------------
// LLM-backed provider (OpenAI-compatible chat completions)

enum class ProviderErrorCode { Network, Auth, Unparseable, TokenBudget, Protocol };

class ProviderError : public std::runtime_error {
 public:
  ProviderError(ProviderErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code(code) {}
  ProviderErrorCode code;
};

struct LlmConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1";  // POST <endpoint>/chat/completions
  std::string model = "gpt-5";
  std::string token_env = "OPENAI_API_KEY";
  int max_retries = 3;
  int request_cap = 4;           // concurrent in-flight requests
  std::string provenance_dir;    // request/response log directory; empty = off
  std::string prompt_assign;     // template texts; empty selects the built-in
  std::string prompt_spec;
  std::string prompt_recon;
};

/// Raw chat transport: takes the request body, returns the response body.
/// Injectable so tests can stub the network.
using ChatTransport = std::function<std::string(const nlohmann::json& request)>;

class LlmProvider : public SemanticsProvider {
 public:
  explicit LlmProvider(LlmConfig cfg, ChatTransport transport = nullptr);
  ~LlmProvider() override;

  AssignedSemantics assign_semantics(const AbstractGraph& g) override;
  SpecDocument spec_from_fsm(const SemanticFsm& f) override;
  SemanticFsm fsm_from_spec(const SpecDocument& spec, const StateMapping& mapping,
                            const InterfaceSignature& iface) override;
  void begin_problem(const std::string& id, uint64_t seed) override;
  std::unique_ptr<SemanticsProvider> clone() const override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;  // shared across clones: transport, request cap
  std::string context_ = "unnamed";
  explicit LlmProvider(std::shared_ptr<Impl> shared);
};

/// Template placeholders: {EDGE_LIST} {PHASES} {STATE_MAPPING} {YAML} {SPEC}
/// {INTERFACE}.
std::string expand_prompt(const std::string& tmpl,
                          const std::vector<std::pair<std::string, std::string>>& slots);

int count_words(const std::string& text);

}  // namespace fsmforge
