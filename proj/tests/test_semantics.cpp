// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "doctest.h"
#include "fsmforge/semantics.hpp"
#include "fsmforge/stimgen.hpp"
#include "fsmforge/topo.hpp"
#include "fsmforge/verify.hpp"
#include "fsmforge/yaml_io.hpp"
#include "test_helpers.hpp"

using namespace fsmforge;

namespace {

AbstractGraph minimal_graph() {
  TopoConfig cfg;
  cfg.num_phases = 1;
  cfg.states_per_phase = {3, 3};
  cfg.max_out_degree = 4;
  cfg.seed = 0;
  return sample_graph(cfg).graph;
}

TopoConfig random_cfg(Rng& rng) {
  TopoConfig cfg;
  cfg.num_phases = rng.range(1, 4);
  cfg.states_per_phase = {1, 5};
  cfg.p_forward_branch = 0.5;
  cfg.p_back_edge = 0.4;
  cfg.p_self_loop = 0.3;
  cfg.max_out_degree = 4;
  cfg.num_inter_phase_jumps = 2;
  cfg.seed = rng.next_u64();
  return cfg;
}

}  // namespace

TEST_SUITE("semantics") {

TEST_CASE("mock semantics of the minimal graph") {
  const auto [fsm, mapping, story] = mock_assign_semantics(minimal_graph(), 7);
  CHECK(fsm.name == "fsm_0000000000000007");
  CHECK(fsm.inputs == std::vector<std::string>{"go"});  // out-degree 1 everywhere
  CHECK(fsm.outputs ==
        std::vector<std::pair<std::string, int>>{{"phase_id", 1}, {"at_exit", 1}});
  CHECK(fsm.reset_state == "INIT");
  CHECK(mapping.pairs.at(0) == "INIT");
  CHECK(mapping.pairs.at(1) == "P0_S0");
  CHECK(mapping.pairs.at(3) == "P0_S2");
  CHECK(validate_fsm(fsm).ok());
  CHECK(!story.empty());
}

TEST_CASE("mock output: phase ids and exit flags") {
  const auto g = minimal_graph();
  const auto [fsm, mapping, story] = mock_assign_semantics(g, 1);
  const StateDef* init = fsm.find_state("INIT");
  REQUIRE(init != nullptr);
  CHECK(init->outputs == std::vector<std::pair<std::string, uint64_t>>{{"phase_id", 0},
                                                                       {"at_exit", 0}});
  const StateDef* exit_state = fsm.find_state(mapping.pairs.at(g.phases[0].exit));
  REQUIRE(exit_state != nullptr);
  CHECK(exit_state->outputs == std::vector<std::pair<std::string, uint64_t>>{{"phase_id", 1},
                                                                             {"at_exit", 1}});
}

TEST_CASE("mock semantics always passes isomorphism") {
  Rng rng(51);
  for (int i = 0; i < 200; ++i) {
    const auto g = sample_graph(random_cfg(rng)).graph;
    const auto assigned = mock_assign_semantics(g, rng.next_u64());
    CHECK(check_isomorphism(g, assigned.fsm, assigned.mapping).isomorphic);
  }
}

TEST_CASE("mock semantics keeps every explicit edge feasible") {
  Rng rng(52);
  for (int i = 0; i < 60; ++i) {
    const auto g = sample_graph(random_cfg(rng)).graph;
    const auto assigned = mock_assign_semantics(g, rng.next_u64());
    const auto feas = feasible_edges(assigned.fsm);
    CHECK(feas.size() == assigned.fsm.explicit_edge_count());
  }
}

TEST_CASE("selector width follows the widest fan-out") {
  Rng rng(53);
  for (int i = 0; i < 40; ++i) {
    const auto g = sample_graph(random_cfg(rng)).graph;
    const auto assigned = mock_assign_semantics(g, 1);
    int max_out = 0;
    std::map<int, int> deg;
    for (const auto& [u, v] : g.edges) max_out = std::max(max_out, ++deg[u]);
    int want = 1;  // go
    if (max_out >= 2) {
      int bits = 0;
      while ((1 << bits) < max_out) ++bits;
      want += bits;
    }
    CHECK(static_cast<int>(assigned.fsm.inputs.size()) == want);
    CHECK(static_cast<int>(assigned.fsm.inputs.size()) <= 4);
  }
}

TEST_CASE("mock determinism: equal (graph, seed) -> equal bytes") {
  const auto g = minimal_graph();
  CHECK(serialize_fsm_yaml(mock_assign_semantics(g, 5).fsm) ==
        serialize_fsm_yaml(mock_assign_semantics(g, 5).fsm));
  CHECK(serialize_fsm_yaml(mock_assign_semantics(g, 5).fsm) !=
        serialize_fsm_yaml(mock_assign_semantics(g, 6).fsm));
}

TEST_CASE("spec template contains the documented sentence shape") {
  const SpecDocument doc = mock_spec_from_fsm(testutil::toggle_fsm());
  CHECK(doc.io_section.find("- input en: 1 bit") != std::string::npos);
  CHECK(doc.io_section.find("- output y: 1 bit") != std::string::npos);
  CHECK(doc.requirements_section.find("if en, the machine moves to B") != std::string::npos);
  CHECK(doc.word_count == count_words(doc.text()));
  CHECK(doc.word_count > 0);
}

TEST_CASE("mock round trip is the identity") {
  Rng rng(54);
  for (int i = 0; i < 60; ++i) {
    const auto g = sample_graph(random_cfg(rng)).graph;
    const auto assigned = mock_assign_semantics(g, rng.next_u64());
    const SpecDocument doc = mock_spec_from_fsm(assigned.fsm);
    const SemanticFsm back =
        mock_fsm_from_spec(doc, assigned.mapping, InterfaceSignature::of(assigned.fsm));
    CHECK(back == assigned.fsm);
  }
}

TEST_CASE("round trip survives machines with empty transition lists") {
  SemanticFsm f = testutil::toggle_fsm();
  f.states[1].second.transitions.clear();
  StateMapping m;
  m.pairs = {{0, "A"}, {1, "B"}};
  const SemanticFsm back = mock_fsm_from_spec(mock_spec_from_fsm(f), m, InterfaceSignature::of(f));
  CHECK(back == f);
}

TEST_CASE("deleting a requirement never silently succeeds") {
  const auto g = minimal_graph();
  const auto assigned = mock_assign_semantics(g, 3);
  SpecDocument doc = mock_spec_from_fsm(assigned.fsm);

  // drop the INIT requirement line
  const size_t at = doc.requirements_section.find("R1. ");
  const size_t end = doc.requirements_section.find('\n', at);
  SpecDocument broken = doc;
  broken.requirements_section.erase(at, end - at + 1);
  CHECK_THROWS_AS(
      mock_fsm_from_spec(broken, assigned.mapping, InterfaceSignature::of(assigned.fsm)),
      ReconstructionError);
}

TEST_CASE("empty requirements section is a reconstruction error") {
  const auto assigned = mock_assign_semantics(minimal_graph(), 3);
  SpecDocument doc = mock_spec_from_fsm(assigned.fsm);
  doc.requirements_section = "## Requirements\n";
  CHECK_THROWS_AS(
      mock_fsm_from_spec(doc, assigned.mapping, InterfaceSignature::of(assigned.fsm)),
      ReconstructionError);
}

TEST_CASE("interface signature mismatches are reconstruction errors") {
  const SemanticFsm f = testutil::toggle_fsm();
  StateMapping m;
  m.pairs = {{0, "A"}, {1, "B"}};
  InterfaceSignature iface = InterfaceSignature::of(f);
  iface.inputs = {"enable"};
  CHECK_THROWS_AS(mock_fsm_from_spec(mock_spec_from_fsm(f), m, iface), ReconstructionError);
}

TEST_CASE("spec word count grows with state count across tiers") {
  double means[3] = {0, 0, 0};
  int idx = 0;
  for (Tier tier : {Tier::Low, Tier::Medium, Tier::High}) {
    double total = 0;
    for (uint64_t seed = 0; seed < 40; ++seed) {
      const auto g = sample_graph(preset_config(tier, seed)).graph;
      total += mock_spec_from_fsm(mock_assign_semantics(g, seed).fsm).word_count;
    }
    means[idx++] = total / 40;
  }
  CHECK(means[0] < means[1]);
  CHECK(means[1] < means[2]);
}

TEST_CASE("llm provider parses a stubbed valid response") {
  const auto assigned = mock_assign_semantics(minimal_graph(), 9);
  const std::string yaml = serialize_fsm_yaml(assigned.fsm);
  nlohmann::json mapping_json;
  for (const auto& [id, name] : assigned.mapping.pairs) mapping_json[std::to_string(id)] = name;

  const std::string content = "Here is a controller.\n```yaml\n" + yaml + "```\n```json\n" +
                              mapping_json.dump() + "\n```\nA short story.";
  int calls = 0;
  LlmConfig cfg;
  LlmProvider provider(cfg, [&](const nlohmann::json& request) {
    ++calls;
    CHECK(request.at("model") == "gpt-5");
    CHECK(request.at("messages").at(0).at("content").get<std::string>().find("0 -> 1") !=
          std::string::npos);
    nlohmann::json response{
        {"choices",
         {{{"finish_reason", "stop"}, {"message", {{"role", "assistant"}, {"content", content}}}}}}};
    return response.dump();
  });

  const AssignedSemantics out = provider.assign_semantics(minimal_graph());
  CHECK(calls == 1);
  CHECK(out.fsm == assigned.fsm);
  CHECK(out.mapping == assigned.mapping);
  CHECK(out.story.find("short story") != std::string::npos);
}

TEST_CASE("llm provider surfaces unparseable responses after retries") {
  LlmConfig cfg;
  cfg.max_retries = 2;
  int calls = 0;
  LlmProvider provider(cfg, [&](const nlohmann::json&) {
    ++calls;
    nlohmann::json response{
        {"choices",
         {{{"finish_reason", "stop"},
           {"message", {{"role", "assistant"}, {"content", "no fences here, just prose"}}}}}}};
    return response.dump();
  });
  try {
    provider.assign_semantics(minimal_graph());
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.code == ProviderErrorCode::Unparseable);
    CHECK(calls == 3);  // initial attempt + 2 retries
  }
}

TEST_CASE("llm provider maps transport failures to distinct codes") {
  LlmConfig cfg;
  LlmProvider auth_failing(cfg, [&](const nlohmann::json&) -> std::string {
    throw ProviderError(ProviderErrorCode::Auth, "401");
  });
  CHECK_THROWS_AS(auth_failing.spec_from_fsm(testutil::toggle_fsm()), ProviderError);

  LlmProvider budget(cfg, [&](const nlohmann::json&) {
    nlohmann::json response{
        {"choices",
         {{{"finish_reason", "length"}, {"message", {{"role", "assistant"}, {"content", ""}}}}}}};
    return response.dump();
  });
  try {
    budget.spec_from_fsm(testutil::toggle_fsm());
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.code == ProviderErrorCode::TokenBudget);
  }
}

TEST_CASE("llm reconstruction feeds the same downstream checks as the mock") {
  const auto g = minimal_graph();
  const auto assigned = mock_assign_semantics(g, 11);
  const SpecDocument doc = mock_spec_from_fsm(assigned.fsm);

  LlmConfig cfg;
  LlmProvider provider(cfg, [&](const nlohmann::json&) {
    nlohmann::json response{
        {"choices",
         {{{"finish_reason", "stop"},
           {"message",
            {{"role", "assistant"},
             {"content", "```yaml\n" + serialize_fsm_yaml(assigned.fsm) + "```"}}}}}}};
    return response.dump();
  });
  const SemanticFsm back =
      provider.fsm_from_spec(doc, assigned.mapping, InterfaceSignature::of(assigned.fsm));
  CHECK(check_equivalence(assigned.fsm, back).equivalent);
  CHECK(check_isomorphism(g, back, assigned.mapping).isomorphic);
}

TEST_CASE("llm provider logs request/response pairs per problem") {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("fsmforge_prov_" + std::to_string(::getpid()));
  fs::remove_all(dir);

  LlmConfig cfg;
  cfg.provenance_dir = dir.string();
  cfg.max_retries = 0;
  LlmProvider provider(cfg, [&](const nlohmann::json&) {
    nlohmann::json response{
        {"choices",
         {{{"finish_reason", "stop"},
           {"message",
            {{"role", "assistant"},
             {"content", "## Inputs and Outputs\nen y\n## Requirements\nR1. x\n"}}}}}}};
    return response.dump();
  });
  provider.begin_problem("prob_a", 1);
  provider.spec_from_fsm(testutil::toggle_fsm());
  provider.spec_from_fsm(testutil::toggle_fsm());
  CHECK(fs::exists(dir / "prob_a_0.json"));
  CHECK(fs::exists(dir / "prob_a_1.json"));
  const auto logged = nlohmann::json::parse(std::ifstream(dir / "prob_a_0.json"));
  CHECK(logged.at("kind") == "spec_from_fsm");
  CHECK(logged.at("request").contains("messages"));
  fs::remove_all(dir);
}

TEST_CASE("llm spec documents must mention every signal") {
  LlmConfig cfg;
  cfg.max_retries = 0;
  LlmProvider provider(cfg, [&](const nlohmann::json&) {
    nlohmann::json response{
        {"choices",
         {{{"finish_reason", "stop"},
           {"message",
            {{"role", "assistant"},
             {"content", "## Inputs and Outputs\nnothing relevant\n## Requirements\nR1. x\n"}}}}}}};
    return response.dump();
  });
  CHECK_THROWS_AS(provider.spec_from_fsm(testutil::toggle_fsm()), ProviderError);
}

TEST_CASE("prompt expansion replaces every slot") {
  const std::string out =
      expand_prompt("a {X} b {Y} c {X}", {{"X", "1"}, {"Y", "2"}});
  CHECK(out == "a 1 b 2 c 1");
}

}  // TEST_SUITE
