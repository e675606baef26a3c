// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: end-to-end checks of curation, tier fidelity, the
// equivalence engine, stimulus coverage, evaluation aggregation, the guard
// toolchain, and (when a simulator is configured) emitted-RTL fidelity.
// Prints one PASS/FAIL/SKIP line per criterion.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fsmforge/emit.hpp"
#include "fsmforge/eval.hpp"
#include "fsmforge/pipeline.hpp"
#include "fsmforge/semantics.hpp"
#include "fsmforge/stimgen.hpp"
#include "fsmforge/topo.hpp"
#include "fsmforge/verify.hpp"
#include "fsmforge/yaml_io.hpp"
#include "test_helpers.hpp"

using namespace fsmforge;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Harness {
  int failures = 0;

  void report(int index, const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << index << ": " << name;
    if (!detail.empty()) std::cout << ": " << detail;
    std::cout << "\n";
    if (!ok) ++failures;
  }
  void skip(int index, const std::string& name, const std::string& why) {
    std::cout << "[SKIP] criterion " << index << ": " << name << ": " << why << "\n";
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << content;
}

bool trees_equal(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> rel_a, rel_b;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel_a.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) rel_b.push_back(fs::relative(e.path(), b));
  std::sort(rel_a.begin(), rel_a.end());
  std::sort(rel_b.begin(), rel_b.end());
  if (rel_a != rel_b) {
    why = "directory listings differ";
    return false;
  }
  for (const auto& rel : rel_a)
    if (slurp(a / rel) != slurp(b / rel)) {
      why = "byte difference in " + rel.string();
      return false;
    }
  return true;
}

std::vector<fs::path> problem_dirs(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& tier : fs::directory_iterator(root / "problems"))
    for (const auto& p : fs::directory_iterator(tier.path())) out.push_back(p.path());
  std::sort(out.begin(), out.end());
  return out;
}

// --- criterion 3 helpers ----------------------------------------------------

// Exhaustive simulation of all input sequences up to |Sa|*|Sb|, pruning
// revisited joint pairs (safe: a revisit at greater depth explores a subset).
bool oracle_divergence_rec(const SemanticFsm& a, const SemanticFsm& b, const std::string& sa,
                           const std::string& sb, size_t budget,
                           std::set<std::pair<std::string, std::string>>& seen) {
  std::map<std::string, uint64_t> oa, ob;
  for (const auto& [n, v] : a.find_state(sa)->outputs) oa[n] = v;
  for (const auto& [n, v] : b.find_state(sb)->outputs) ob[n] = v;
  if (oa != ob) return true;
  if (budget == 0 || !seen.emplace(sa, sb).second) return false;
  const uint64_t space = uint64_t{1} << a.inputs.size();
  for (uint64_t mask = 0; mask < space; ++mask) {
    const InputValuation v = valuation_from_mask(a.inputs, mask);
    auto advance = [&](const SemanticFsm& f, const std::string& s) {
      for (const Transition& t : f.find_state(s)->transitions)
        if (eval_guard(t.guard, v)) return t.next;
      return s;
    };
    if (oracle_divergence_rec(a, b, advance(a, sa), advance(b, sb), budget - 1, seen)) return true;
  }
  return false;
}

bool oracle_divergence(const SemanticFsm& a, const SemanticFsm& b) {
  std::set<std::pair<std::string, std::string>> seen;
  return oracle_divergence_rec(a, b, a.reset_state, b.reset_state,
                               a.states.size() * b.states.size(), seen);
}

SemanticFsm renamed_copy(const SemanticFsm& f, const std::string& suffix) {
  SemanticFsm g = f;
  g.reset_state += suffix;
  for (auto& [name, def] : g.states) {
    name += suffix;
    for (auto& t : def.transitions) t.next += suffix;
  }
  return g;
}

// --- criterion 7 helpers ----------------------------------------------------

std::string detect_sim_cmd() {
  if (const char* env = std::getenv("FSMFORGE_SIM_CMD"); env && *env) return env;
  const char* path_env = std::getenv("PATH");
  std::istringstream paths(path_env ? path_env : "");
  std::string dir;
  while (std::getline(paths, dir, ':')) {
    if (!dir.empty() && fs::exists(dir + "/iverilog") && fs::exists(dir + "/vvp"))
      return "iverilog -g2012 -o /tmp/fsmforge_{top}.vvp {sources} && vvp /tmp/fsmforge_{top}.vvp";
  }
  return "";
}

}  // namespace

int main() {
  Harness h;
  const fs::path scratch =
      fs::temp_directory_path() / ("fsmforge_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  const fs::path run1 = scratch / "run1";
  const fs::path run2 = scratch / "run2";
  constexpr uint64_t kSeed = 20240001;
  constexpr int kPerTier = 30;

  // criterion 1: hermetic curation -------------------------------------------
  {
    std::string detail;
    bool ok = true;
    const auto start = Clock::now();
    try {
      for (const fs::path& root : {run1, run2})
        for (Tier tier : {Tier::Low, Tier::Medium, Tier::High}) {
          MockProvider provider;
          const CurationReport report = curate(tier, kPerTier, kSeed, provider, root);
          const CurationCounters c = report.per_tier.at(tier);
          if (c.attempted != kPerTier || c.accepted != kPerTier || c.iso_passed != kPerTier ||
              c.feasible_passed != kPerTier || c.equiv_passed != kPerTier) {
            ok = false;
            detail = tier_name(tier) + " acceptance rate below 100%";
          }
        }
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    const double elapsed = seconds_since(start);
    if (ok && elapsed >= 300.0) {
      ok = false;
      detail = "curation took " + std::to_string(elapsed) + "s (>= 300s)";
    }
    std::string why;
    if (ok && !trees_equal(run1, run2, why)) {
      ok = false;
      detail = "rerun not byte-identical: " + why;
    }
    if (ok) {
      std::ostringstream d;
      d << "3x" << kPerTier << " problems, 100% accepted, rerun byte-identical, "
        << std::fixed << std::setprecision(1) << elapsed << "s";
      detail = d.str();
    }
    h.report(1, "hermetic curation", ok, detail);
  }

  // criterion 2: tier fidelity ------------------------------------------------
  {
    bool ok = true;
    std::string detail;
    const std::map<Tier, std::pair<double, double>> targets = {
        {Tier::Low, {2.71, 11.95}},
        {Tier::Medium, {5.24, 32.17}},
        {Tier::High, {8.83, 65.39}}};
    std::ostringstream d;
    for (const auto& [tier, target] : targets) {
      const auto [lo, hi] = tier_bounds(tier);
      double phases = 0, edges = 0;
      const int samples = 150;
      for (uint64_t s = 0; s < samples && ok; ++s) {
        const auto g = sample_graph(preset_config(tier, kSeed + s)).graph;
        const int n = static_cast<int>(g.states.size());
        if (n < lo || n >= hi) {
          ok = false;
          detail = tier_name(tier) + " state count " + std::to_string(n) + " out of bounds";
        }
        phases += static_cast<double>(g.phases.size());
        edges += static_cast<double>(g.edges.size());
      }
      phases /= samples;
      edges /= samples;
      if (ok && std::abs(phases - target.first) > 1.0) {
        ok = false;
        detail = tier_name(tier) + " mean phases " + std::to_string(phases);
      }
      if (ok && std::abs(edges - target.second) > 0.30 * target.second) {
        ok = false;
        detail = tier_name(tier) + " mean edges " + std::to_string(edges);
      }
      d << tier_name(tier) << " phases " << std::fixed << std::setprecision(2) << phases
        << " edges " << edges << "; ";
    }
    // persisted problems stay in bounds; spec-word and code-line means rise
    if (ok) {
      std::map<Tier, std::pair<double, double>> means;  // (spec_words, rtl_lines)
      std::map<Tier, int> counts;
      for (const fs::path& dir : problem_dirs(run1)) {
        const ProblemRecord rec = load_problem(dir);
        const auto [lo, hi] = tier_bounds(rec.tier);
        if (rec.stats.n_states < lo || rec.stats.n_states >= hi) {
          ok = false;
          detail = rec.id + " state count out of tier bounds";
          break;
        }
        means[rec.tier].first += rec.stats.spec_words;
        means[rec.tier].second += rec.stats.rtl_lines;
        ++counts[rec.tier];
      }
      if (ok) {
        for (auto& [tier, m] : means) {
          m.first /= counts[tier];
          m.second /= counts[tier];
        }
        const bool words_up = means[Tier::Low].first < means[Tier::Medium].first &&
                              means[Tier::Medium].first < means[Tier::High].first;
        const bool lines_up = means[Tier::Low].second < means[Tier::Medium].second &&
                              means[Tier::Medium].second < means[Tier::High].second;
        if (!words_up || !lines_up) {
          ok = false;
          detail = "spec-word or rtl-line means not strictly increasing";
        }
      }
    }
    if (ok) detail = d.str() + "monotone spec words and rtl lines";
    h.report(2, "tier fidelity", ok, detail);
  }

  // criterion 3: equivalence engine vs oracle ---------------------------------
  {
    bool ok = true;
    std::string detail;
    Rng rng(kSeed);
    int negatives = 0;
    for (int i = 0; i < 200 && ok; ++i) {
      const SemanticFsm a = testutil::random_fsm(rng, 4, 2);
      SemanticFsm b;
      switch (i % 4) {
        case 0:
          b = a;
          break;
        case 1:
          b = renamed_copy(a, "_x");
          break;
        case 2: {
          b = a;
          auto& outs = b.states[rng.bounded(b.states.size())].second.outputs;
          outs[rng.bounded(outs.size())].second ^= 1;
          break;
        }
        default: {
          b = a;
          auto& def = b.states[rng.bounded(b.states.size())].second;
          def.transitions.push_back({testutil::random_small_guard(rng, b.inputs, 2),
                                     b.states[rng.bounded(b.states.size())].first});
          break;
        }
      }
      const EquivVerdict v = check_equivalence(a, b);
      if (v.equivalent == oracle_divergence(a, b)) {
        ok = false;
        detail = "verdict disagrees with the oracle at pair " + std::to_string(i);
        break;
      }
      if (!v.equivalent) {
        ++negatives;
        const auto diffs = replay_counterexample(a, b, v.counterexample);
        bool witnessed = false;
        for (const auto& diff : diffs)
          if (diff.cycle == *v.mismatch_cycle && diff.output == *v.mismatch_output)
            witnessed = true;
        if (!witnessed || diffs.front().cycle != *v.mismatch_cycle) {
          ok = false;
          detail = "counterexample does not replay at the reported cycle";
          break;
        }
      }
    }
    if (ok && negatives < 40) {
      ok = false;
      detail = "mutation mix produced too few negatives (" + std::to_string(negatives) + ")";
    }

    double hard_seconds = 0;
    if (ok) {
      // 59-state machine with 6 inputs: two 29-state phases plus reset,
      // selector/go inputs padded with unused lines up to 6
      TopoConfig cfg;
      cfg.num_phases = 2;
      cfg.states_per_phase = {29, 29};
      cfg.p_forward_branch = 0.4;
      cfg.p_back_edge = 0.3;
      cfg.p_self_loop = 0.3;
      cfg.max_out_degree = 4;
      cfg.num_inter_phase_jumps = 2;
      cfg.seed = kSeed;
      SemanticFsm big = mock_assign_semantics(sample_graph(cfg).graph, kSeed).fsm;
      while (big.inputs.size() < 6)
        big.inputs.push_back("pad_" + std::to_string(big.inputs.size()));
      if (big.states.size() != 59) {
        ok = false;
        detail = "hard-tier machine has " + std::to_string(big.states.size()) + " states";
      } else {
        const auto start = Clock::now();
        const EquivVerdict same = check_equivalence(big, renamed_copy(big, "_r"));
        // flipping an output in the last state forces a deep product search
        SemanticFsm deep = renamed_copy(big, "_m");
        deep.states.back().second.outputs[1].second ^= 1;
        const EquivVerdict diverged = check_equivalence(big, deep);
        hard_seconds = seconds_since(start);
        if (!same.equivalent) {
          ok = false;
          detail = "renamed 59-state machine judged inequivalent";
        } else if (diverged.equivalent) {
          ok = false;
          detail = "deep output mutation went undetected";
        } else if (hard_seconds >= 1.0) {
          ok = false;
          detail = "hard-tier checks took " + std::to_string(hard_seconds) + "s (>= 1s)";
        } else if (replay_counterexample(big, deep, diverged.counterexample).empty()) {
          ok = false;
          detail = "deep counterexample does not replay";
        }
      }
    }
    if (ok) {
      std::ostringstream d;
      d << "200 pairs match the oracle (" << negatives
        << " negatives, all replayed), 59-state/6-input checks in " << std::fixed
        << std::setprecision(1) << hard_seconds * 1000.0 << "ms";
      detail = d.str();
    }
    h.report(3, "equivalence engine", ok, detail);
  }

  // criterion 4: stimulus coverage --------------------------------------------
  {
    bool ok = true;
    std::string detail;
    const auto dirs = problem_dirs(run1);
    const auto start = Clock::now();
    size_t plan_rows = 0;
    for (const fs::path& dir : dirs) {
      const ProblemRecord rec = load_problem(dir);
      const StimulusPlan stim = plan(rec.fsm, rec.seed, 0);
      plan_rows += flatten(stim).size();
      const Coverage cov = coverage(rec.fsm, flatten(stim));
      if (cov.edges.size() != rec.fsm.explicit_edge_count()) {
        ok = false;
        detail = rec.id + " covers " + std::to_string(cov.edges.size()) + " of " +
                 std::to_string(rec.fsm.explicit_edge_count()) + " edges";
        break;
      }
      // the persisted golden trace must itself cover everything
      std::vector<InputValuation> inputs;
      for (const auto& row : rec.golden.rows) inputs.push_back(row.inputs);
      if (coverage(rec.fsm, inputs).edges.size() != rec.fsm.explicit_edge_count()) {
        ok = false;
        detail = rec.id + " persisted golden trace is not covering";
        break;
      }
    }
    const double elapsed = seconds_since(start);
    if (ok && elapsed >= 10.0) {
      ok = false;
      detail = "planning all problems took " + std::to_string(elapsed) + "s (>= 10s)";
    }
    if (ok) {
      std::ostringstream d;
      d << dirs.size() << " problems fully covered, " << plan_rows << " planned cycles in "
        << std::fixed << std::setprecision(2) << elapsed << "s";
      detail = d.str();
    }
    h.report(4, "stimulus coverage", ok, detail);
  }

  // criterion 5: evaluation self-consistency ----------------------------------
  {
    bool ok = true;
    std::string detail;
    try {
      const fs::path self_cands = scratch / "cands_self";
      const fs::path mut_cands = scratch / "cands_mutated";
      for (const fs::path& dir : problem_dirs(run1)) {
        const ProblemRecord rec = load_problem(dir);
        const std::string ref = serialize_fsm_yaml(rec.fsm);
        SemanticFsm broken = rec.fsm;
        for (auto& [name, def] : broken.states)
          if (name == broken.reset_state) def.outputs[0].second ^= 1;
        write(self_cands / rec.id / "sample_0.yaml", ref);
        write(mut_cands / rec.id / "sample_0.yaml", ref);
        write(mut_cands / rec.id / "sample_1.yaml", serialize_fsm_yaml(broken));
        write(mut_cands / rec.id / "sample_2.yaml", ref);
        write(mut_cands / rec.id / "sample_3.yaml", ref);
      }
      EvalOptions opts;
      const auto self_report = evaluate_run(run1, self_cands, opts);
      for (const std::string tier : {"low", "medium", "high"})
        if (self_report.at("tiers").at(tier).at("pass_at").at("1") != 1.0) {
          ok = false;
          detail = "self-evaluation Pass@1 below 1.0 for " + tier;
        }
      const auto mut_report = evaluate_run(run1, mut_cands, opts);
      for (const std::string tier : {"low", "medium", "high"}) {
        const auto& pass_at = mut_report.at("tiers").at(tier).at("pass_at");
        if (std::abs(pass_at.at("1").get<double>() - 0.75) > 1e-12 ||
            pass_at.at("4").get<double>() != 1.0) {
          ok = false;
          detail = "mutated-sample rates wrong for " + tier;
        }
      }
      if (std::abs(pass_at_k(4, 2, 2) - 5.0 / 6.0) > 1e-12) {
        ok = false;
        detail = "pass_at_k(4,2,2) != 5/6";
      }
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    if (ok) detail = "Pass@1 = 1.0 on references; 0.75 / pass@4 = 1.0 with 1-of-4 mutated; 5/6 exact";
    h.report(5, "evaluation self-consistency", ok, detail);
  }

  // criterion 6: guard and priority-solver suite ------------------------------
  {
    bool ok = true;
    std::string detail;
    const std::vector<std::string> vars = {"a", "b", "c", "d", "e", "f"};
    Rng rng(kSeed + 6);
    for (int i = 0; i < 1000 && ok; ++i) {
      const Guard g = testutil::random_small_guard(rng, vars, 6);
      const std::string printed = print_guard(g);
      Guard reparsed;
      try {
        reparsed = parse_guard(printed);
      } catch (const GuardParseError& e) {
        ok = false;
        detail = "print output failed to reparse: " + printed;
        break;
      }
      if (print_guard(reparsed) != printed) {
        ok = false;
        detail = "print is not a fixpoint for: " + printed;
        break;
      }
      for (uint64_t mask = 0; mask < 64; ++mask) {
        const InputValuation v = valuation_from_mask(vars, mask);
        if (eval_guard(g, v) != eval_guard(reparsed, v)) {
          ok = false;
          detail = "truth table changed across round trip: " + printed;
          break;
        }
      }
    }
    if (ok) {
      for (int i = 0; i < 1000 && ok; ++i) {
        StateDef s;
        const int n_edges = rng.range(1, 5);
        for (int e = 0; e < n_edges; ++e)
          s.transitions.push_back({testutil::random_small_guard(rng, vars, 3), "T"});
        const size_t idx = rng.bounded(n_edges);
        std::optional<InputValuation> expect;
        for (uint64_t mask = 0; mask < 64 && !expect; ++mask) {
          const InputValuation v = valuation_from_mask(vars, mask);
          size_t taken = s.transitions.size();
          for (size_t t = 0; t < s.transitions.size(); ++t)
            if (eval_guard(s.transitions[t].guard, v)) {
              taken = t;
              break;
            }
          if (taken == idx) expect = v;
        }
        if (solve_priority(s, idx, vars) != expect) {
          ok = false;
          detail = "solve_priority disagrees with enumeration at case " + std::to_string(i);
        }
      }
    }
    if (ok) detail = "1000 round-trip guards and 1000 priority witnesses, all exact";
    h.report(6, "guard/parser suite", ok, detail);
  }

  // criterion 7: emitted-RTL fidelity (conditional) ----------------------------
  {
    const std::string sim_cmd = detect_sim_cmd();
    if (sim_cmd.empty()) {
      h.skip(7, "emitted-RTL fidelity",
             "no external simulator configured (set FSMFORGE_SIM_CMD or install iverilog); "
             "all other criteria are hermetic");
    } else {
      bool ok = true;
      std::string detail;
      const auto dirs = problem_dirs(run1);
      int checked = 0;
      for (size_t i = 0; i < dirs.size() && checked < 20 && ok; i += dirs.size() / 20 + 1) {
        const ProblemRecord rec = load_problem(dirs[i]);
        ++checked;
        const SimCommand sim{sim_cmd, 60};
        const EvalVerdict ref_verdict = eval_rtl_candidate(rec, dirs[i] / "ref.sv", sim);
        if (ref_verdict.outcome != Outcome::Pass) {
          ok = false;
          detail = rec.id + " reference RTL did not pass its testbench";
          break;
        }
        // mutate: flip the reset state's first output; fsm-sim predicts the cycle
        SemanticFsm broken = rec.fsm;
        for (auto& [name, def] : broken.states)
          if (name == broken.reset_state) def.outputs[0].second ^= 1;
        std::vector<InputValuation> inputs;
        for (const auto& row : rec.golden.rows) inputs.push_back(row.inputs);
        const Trace predicted = run(broken, inputs);
        int predicted_cycle = -1;
        for (size_t t = 0; t < predicted.rows.size() && predicted_cycle < 0; ++t)
          if (predicted.rows[t].outputs != rec.golden.rows[t].outputs)
            predicted_cycle = static_cast<int>(t);
        const fs::path mutated_sv = scratch / (rec.id + "_mutated.sv");
        write(mutated_sv, emit_rtl(broken, StateEncoding::OneHot));
        const EvalVerdict mut_verdict = eval_rtl_candidate(rec, mutated_sv, sim);
        if (mut_verdict.outcome != Outcome::Mismatch ||
            mut_verdict.mismatch_cycle != predicted_cycle) {
          ok = false;
          detail = rec.id + " mutated RTL did not fail at the predicted cycle";
        }
      }
      if (ok) detail = std::to_string(checked) + " problems: reference passes, mutants fail on cue";
      h.report(7, "emitted-RTL fidelity", ok, detail);
    }
  }

  // criterion 8: out-of-scope reproductions ------------------------------------
  h.skip(8, "paper-scale model accuracy and filter rates",
         "proprietary-LLM results are not reproducible at desk scale; replaced by criteria 1-7");

  fs::remove_all(scratch);
  if (h.failures == 0) {
    std::cout << "acceptance: all criteria satisfied\n";
    return 0;
  }
  std::cout << "acceptance: " << h.failures << " criterion(s) failed\n";
  return 1;
}
