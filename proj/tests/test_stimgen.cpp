// SPDX-License-Identifier: Apache-2.0
#include <deque>

#include "doctest.h"
#include "fsmforge/stimgen.hpp"
#include "test_helpers.hpp"

using namespace fsmforge;

namespace {

// Brute-force oracle: forward closure over states x all valuations, taking
// the first-true-guard rule directly on the tree representation.
std::set<std::pair<std::string, int>> oracle_feasible(const SemanticFsm& f) {
  std::set<std::pair<std::string, int>> out;
  std::set<std::string> reached{f.reset_state};
  std::deque<std::string> work{f.reset_state};
  const uint64_t space = uint64_t{1} << f.inputs.size();
  while (!work.empty()) {
    const std::string cur = work.front();
    work.pop_front();
    const StateDef& def = *f.find_state(cur);
    for (uint64_t mask = 0; mask < space; ++mask) {
      const InputValuation v = valuation_from_mask(f.inputs, mask);
      for (size_t e = 0; e < def.transitions.size(); ++e)
        if (eval_guard(def.transitions[e].guard, v)) {
          out.emplace(cur, static_cast<int>(e));
          const std::string& next = def.transitions[e].next;
          if (reached.insert(next).second) work.push_back(next);
          break;
        }
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("stimgen") {

TEST_CASE("toggle: both edges feasible") {
  CHECK(feasible_edges(testutil::toggle_fsm()) ==
        std::set<std::pair<std::string, int>>{{"A", 0}, {"B", 0}});
}

TEST_CASE("priority-shadowed edges are infeasible") {
  SemanticFsm f = testutil::toggle_fsm();
  f.states[0].second.transitions = {{parse_guard("en"), "B"}, {parse_guard("en"), "A"}};
  const auto feas = feasible_edges(f);
  CHECK(feas.count({"A", 0}) == 1);
  CHECK(feas.count({"A", 1}) == 0);
}

TEST_CASE("unreachable states contribute no feasible edges") {
  SemanticFsm f = testutil::toggle_fsm();
  StateDef island;
  island.outputs = {{"y", 0}};
  island.transitions = {{parse_guard("en"), "A"}};
  f.states.push_back({"ISLAND", island});
  const auto feas = feasible_edges(f);
  CHECK(feas.count({"ISLAND", 0}) == 0);
}

TEST_CASE("feasible set matches the brute-force closure on random machines") {
  Rng rng(31);
  for (int i = 0; i < 120; ++i) {
    const SemanticFsm f = testutil::random_fsm(rng, 10, 3);
    CHECK(feasible_edges(f) == oracle_feasible(f));
  }
}

TEST_CASE("toggle plan covers A->B then B->A") {
  const StimulusPlan p = plan(testutil::toggle_fsm(), 1, 0);
  CHECK(flatten(p) == std::vector<InputValuation>{{{"en", 1}}, {{"en", 1}}});
  REQUIRE(p.segments.size() == 2);
  CHECK(p.segments[0].target == TargetEdge{"A", 0});
  CHECK(p.segments[1].target == TargetEdge{"B", 0});
}

TEST_CASE("single self-loop machine plans one valuation") {
  SemanticFsm f;
  f.name = "loop";
  f.reset_state = "S";
  f.inputs = {"a"};
  f.outputs = {{"y", 1}};
  StateDef s;
  s.outputs = {{"y", 0}};
  s.transitions = {{parse_guard("a"), "S"}};
  f.states = {{"S", s}};
  CHECK(flatten(plan(f, 0, 0)) == std::vector<InputValuation>{{{"a", 1}}});
}

TEST_CASE("replaying a plan covers exactly the feasible set") {
  Rng rng(32);
  for (int i = 0; i < 80; ++i) {
    const SemanticFsm f = testutil::random_fsm(rng, 8, 3);
    const auto feas = feasible_edges(f);
    StimulusPlan p;
    try {
      p = plan(f, 1000 + i, 4);
    } catch (const PlanError&) {
      // random machines may have feasible edges unreachable in one contiguous
      // run; pipeline-generated machines never do (their core is strongly
      // connected), so a PlanError here is a legitimate outcome
      continue;
    }
    const Coverage cov = coverage(f, flatten(p));
    CHECK(cov.edges == feas);
  }
}

TEST_CASE("prefix soundness: each segment ends at its target's destination") {
  Rng rng(33);
  for (int i = 0; i < 40; ++i) {
    const SemanticFsm f = testutil::random_fsm(rng, 8, 3);
    StimulusPlan p;
    try {
      p = plan(f, i, 0);
    } catch (const PlanError&) {
      continue;
    }
    const Simulator sim(f);
    int cur = sim.reset_index();
    for (const PlanSegment& seg : p.segments) {
      for (const InputValuation& v : seg.valuations)
        cur = sim.step_mask(cur, mask_from_valuation(f.inputs, v), nullptr);
      const StateDef& def = *f.find_state(seg.target.state);
      CHECK(sim.state_name(cur) == def.transitions[seg.target.edge].next);
    }
  }
}

TEST_CASE("plans are deterministic in (fsm, seed, tail_len)") {
  const SemanticFsm f = testutil::toggle_fsm();
  CHECK(plan(f, 9, 6) == plan(f, 9, 6));
  CHECK(plan(f, 9, 6) != plan(f, 10, 6));
  CHECK(plan(f, 9, 6).random_tail.size() == 6);
}

TEST_CASE("capacity bound on input count") {
  SemanticFsm f = testutil::toggle_fsm();
  for (int i = 0; i < 21; ++i) f.inputs.push_back("x" + std::to_string(i));
  CHECK_THROWS_AS(plan(f, 0, 0), CapacityError);
}

TEST_CASE("coverage sidecar lists one entry per explicit-edge cycle") {
  const SemanticFsm f = testutil::toggle_fsm();
  const StimulusPlan p = plan(f, 1, 2);
  const auto j = coverage_sidecar(f, p);
  REQUIRE(j.contains("covered"));
  const auto& covered = j["covered"];
  REQUIRE(covered.size() >= 2);
  CHECK(covered[0]["cycle"] == 0);
  CHECK(covered[0]["state"] == "A");
  CHECK(covered[0]["edge"] == 0);
}

}  // TEST_SUITE
