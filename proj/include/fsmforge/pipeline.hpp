// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "fsmforge/core.hpp"
#include "fsmforge/semantics.hpp"
#include "fsmforge/sim.hpp"
#include "json.hpp"

namespace fsmforge {

struct ProblemStats {
  int n_states = 0;
  int n_edges = 0;
  int n_phases = 0;
  int spec_words = 0;
  int rtl_lines = 0;

  bool operator==(const ProblemStats&) const = default;
};

struct ProblemVerdicts {
  bool iso = false;
  bool equiv = false;
  bool feasible = false;
};

/// One benchmark instance; persisted records carry all-true verdicts.
struct ProblemRecord {
  std::string id;
  Tier tier = Tier::Low;
  uint64_t seed = 0;
  SemanticFsm fsm;
  StateMapping mapping;
  SpecDocument spec;
  Trace golden;
  ProblemStats stats;
  ProblemVerdicts verdicts;
  std::string story;
  nlohmann::json coverage;  // stimgen sidecar, embedded into meta.json
  std::filesystem::path source_dir;  // set by load_problem; empty for fresh records
};

struct CurationCounters {
  int attempted = 0;
  int iso_passed = 0;
  int feasible_passed = 0;
  int equiv_passed = 0;
  int accepted = 0;
  int provider_errors = 0;
};

struct CurationReport {
  std::map<Tier, CurationCounters> per_tier;

  CurationCounters totals() const;
  std::string to_text() const;
  nlohmann::json to_json() const;
};

class CurationPartial : public std::runtime_error {
 public:
  CurationPartial(CurationReport rep, const std::string& msg)
      : std::runtime_error(msg), report(std::move(rep)) {}
  CurationReport report;
};

class CollisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CurateOptions {
  int jobs = 0;                // 0 = hardware concurrency
  int tail_factor = 2;         // random tail = factor * explicit edges
  int attempt_cap_factor = 4;  // attempts allowed per requested problem
};

/// Sample -> semantics -> isomorphism filter -> feasibility filter -> golden
/// trace -> spec (F) -> reconstruction (G) -> equivalence filter -> persist.
/// Per-attempt seed is base_seed + attempt index, so reruns are bit-identical.
/// Throws CurationPartial when the attempt cap is exhausted first.
CurationReport curate(Tier tier, int count, uint64_t base_seed, SemanticsProvider& provider,
                      const std::filesystem::path& out_dir, const CurateOptions& opts = {});

/// Writes problems/<tier>/<id>/{problem.yaml, spec.md, ref.sv, tb.sv,
/// golden.csv, meta.json} and updates manifest.json at the root.
std::filesystem::path persist(const ProblemRecord& rec, const std::filesystem::path& root);

ProblemRecord load_problem(const std::filesystem::path& problem_dir);

nlohmann::json read_manifest(const std::filesystem::path& root);

struct DatasetRow {
  Tier tier = Tier::Low;
  int count = 0;
  int min_states = 0;
  int max_states = 0;
  double mean_edges = 0;
  double mean_phases = 0;
  double mean_spec_words = 0;
  double mean_rtl_lines = 0;
};

struct DatasetStats {
  std::vector<DatasetRow> rows;  // low, medium, high (present tiers only)

  std::string to_text() const;
  nlohmann::json to_json() const;
};

DatasetStats dataset_stats(const std::filesystem::path& root);

/// Key-value config text: `key = value`, '#' comments, blank lines ignored.
std::map<std::string, std::string> parse_kv_config(const std::string& text);

std::string problem_id(Tier tier, uint64_t seed);

}  // namespace fsmforge
