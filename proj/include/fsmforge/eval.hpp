// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "fsmforge/pipeline.hpp"
#include "json.hpp"

namespace fsmforge {

enum class Outcome { Pass, CompileFail, ParseFail, Mismatch, ToolError };

std::string outcome_name(Outcome o);

struct EvalVerdict {
  std::string problem_id;
  std::string pipeline;  // "P1" or "P2"
  Outcome outcome = Outcome::ToolError;
  int mismatch_cycle = -1;        // Mismatch only
  std::string mismatch_signal;    // Mismatch only
  std::string detail;

  nlohmann::json to_json() const;
};

/// Pipeline 2: parse the candidate YAML, require the reference interface,
/// replay the golden input sequence, compare every output row.
EvalVerdict eval_yaml_candidate(const ProblemRecord& rec, const std::string& candidate_yaml);

/// External simulator command; {sources} and {top} are substituted.
struct SimCommand {
  std::string tmpl;
  int timeout_s = 60;
};

/// Pipeline 1: compile/run the candidate with the problem's testbench and
/// parse the LLMFSM_PASS / LLMFSM_FAIL sentinels. Missing simulator binaries
/// raise ConfigError; per-problem tool failures come back as verdicts.
EvalVerdict eval_rtl_candidate(const ProblemRecord& rec,
                               const std::filesystem::path& candidate_sv, const SimCommand& sim);

/// Unbiased estimator 1 - C(n-c, k)/C(n, k) in stable product form.
double pass_at_k(int n, int c, int k);

struct EvalOptions {
  std::string pipeline = "yaml";  // "yaml" (P2) or "rtl" (P1)
  std::string sim_cmd;            // required for rtl
  int timeout_s = 60;
  int jobs = 0;      // 0 = hardware concurrency
  int sim_jobs = 0;  // 0 = jobs
};

/// Evaluates candidates/<id>/sample_<j>.{yaml|sv} against the dataset and
/// aggregates per-tier Pass@1 and pass@k for k in {1,2,4,8,16} where sample
/// counts allow. Problems without candidates are reported as missing.
nlohmann::json evaluate_run(const std::filesystem::path& dataset_root,
                            const std::filesystem::path& candidates_dir, const EvalOptions& opts);

}  // namespace fsmforge
