// SPDX-License-Identifier: Apache-2.0
//
// fsmforge: generate, verify, and evaluate FSM specification-to-RTL problems.
//
// Exit codes: 0 success, 1 semantic negative (not equivalent / failures
// present), 2 partial result, 3 interface/config error, 64 usage.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fsmforge/emit.hpp"
#include "fsmforge/eval.hpp"
#include "fsmforge/pipeline.hpp"
#include "fsmforge/semantics.hpp"
#include "fsmforge/sim.hpp"
#include "fsmforge/stimgen.hpp"
#include "fsmforge/topo.hpp"
#include "fsmforge/verify.hpp"
#include "fsmforge/yaml_io.hpp"

namespace fs = std::filesystem;
using namespace fsmforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitPartial = 2;
constexpr int kExitConfig = 3;
constexpr int kExitUsage = 64;

std::string read_file_or_usage(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::ValidationError("cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + path);
  out << content;
}

struct ConfigFile {
  std::map<std::string, std::string> kv;

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  }
  int get_int(const std::string& key, int fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
      return std::stoi(it->second);
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' is not an integer: " + it->second);
    }
  }
};

ConfigFile load_config(const std::string& path) {
  ConfigFile cfg;
  if (!path.empty()) cfg.kv = parse_kv_config(read_file_or_usage(path));
  return cfg;
}

std::unique_ptr<SemanticsProvider> make_provider(const std::string& kind, const ConfigFile& cfg,
                                                 uint64_t seed) {
  if (kind == "mock") return std::make_unique<MockProvider>(seed);
  if (kind != "llm") throw ConfigError("provider must be 'mock' or 'llm', got '" + kind + "'");

  LlmConfig llm;
  llm.endpoint = cfg.get("endpoint", llm.endpoint);
  llm.model = cfg.get("model", llm.model);
  llm.token_env = cfg.get("token_env", llm.token_env);
  llm.max_retries = cfg.get_int("retries", llm.max_retries);
  llm.request_cap = cfg.get_int("request_cap", llm.request_cap);
  llm.provenance_dir = cfg.get("provenance_dir", llm.provenance_dir);
  for (const auto& [key, member] :
       std::initializer_list<std::pair<std::string, std::string*>>{
           {"prompt_assign", &llm.prompt_assign},
           {"prompt_spec", &llm.prompt_spec},
           {"prompt_recon", &llm.prompt_recon}}) {
    const std::string path = cfg.get(key, "");
    if (!path.empty()) *member = read_file_or_usage(path);
  }
  return std::make_unique<LlmProvider>(llm);
}

int cmd_gen(const std::string& tier_text, int count, uint64_t seed,
            const std::string& provider_kind, const std::string& out_dir, int jobs,
            const std::string& config_path) {
  const auto tier = tier_from_name(tier_text);
  if (!tier) throw ConfigError("unknown tier '" + tier_text + "' (low|medium|high)");
  const ConfigFile cfg = load_config(config_path);

  CurateOptions opts;
  opts.jobs = jobs > 0 ? jobs : cfg.get_int("jobs", 0);
  opts.tail_factor = cfg.get_int("tail_factor", opts.tail_factor);
  opts.attempt_cap_factor = cfg.get_int("attempt_cap_factor", opts.attempt_cap_factor);

  const auto provider =
      make_provider(provider_kind.empty() ? cfg.get("provider", "mock") : provider_kind, cfg,
                    seed);
  try {
    const CurationReport report = curate(*tier, count, seed, *provider, out_dir, opts);
    std::cout << report.to_text();
    return kExitOk;
  } catch (const CurationPartial& e) {
    std::cout << e.report.to_text();
    std::cerr << "fsmforge gen: " << e.what() << "\n";
    return kExitPartial;
  }
}

int cmd_stats(const std::string& dir, bool as_json) {
  const DatasetStats stats = dataset_stats(dir);
  if (as_json)
    std::cout << stats.to_json().dump(2) << "\n";
  else
    std::cout << stats.to_text();
  return kExitOk;
}

int cmd_emit_rtl(const std::string& fsm_path, const std::string& encoding,
                 const std::string& out) {
  const SemanticFsm f = parse_fsm_yaml(read_file_or_usage(fsm_path));
  StateEncoding enc;
  if (encoding == "onehot")
    enc = StateEncoding::OneHot;
  else if (encoding == "binary")
    enc = StateEncoding::Binary;
  else
    throw ConfigError("encoding must be 'onehot' or 'binary'");
  write_output(out, emit_rtl(f, enc));
  return kExitOk;
}

int cmd_emit_tb(const std::string& fsm_path, const std::string& golden_path,
                const std::string& out) {
  const SemanticFsm f = parse_fsm_yaml(read_file_or_usage(fsm_path));
  std::vector<std::string> out_names;
  for (const auto& [n, w] : f.outputs) out_names.push_back(n);
  const Trace golden = trace_from_csv(read_file_or_usage(golden_path), f.inputs, out_names);
  if (golden.output_names.empty())
    throw InterfaceError("golden CSV must carry output columns for a self-checking testbench");
  write_output(out, emit_testbench(f, golden));
  return kExitOk;
}

int cmd_emit_miter(const std::string& a_path, const std::string& b_path, const std::string& out) {
  const SemanticFsm a = parse_fsm_yaml(read_file_or_usage(a_path));
  const SemanticFsm b = parse_fsm_yaml(read_file_or_usage(b_path));
  write_output(out, emit_miter(a, b));
  return kExitOk;
}

int cmd_sim(const std::string& fsm_path, const std::string& inputs_path, const std::string& out) {
  const SemanticFsm f = parse_fsm_yaml(read_file_or_usage(fsm_path));
  std::vector<std::string> out_names;
  for (const auto& [n, w] : f.outputs) out_names.push_back(n);
  const Trace stimulus = trace_from_csv(read_file_or_usage(inputs_path), f.inputs, out_names);
  std::vector<InputValuation> inputs;
  for (const auto& row : stimulus.rows) inputs.push_back(row.inputs);
  write_output(out, trace_to_csv(run(f, inputs)));
  return kExitOk;
}

int cmd_equiv(const std::string& a_path, const std::string& b_path, bool as_json) {
  const SemanticFsm a = parse_fsm_yaml(read_file_or_usage(a_path));
  const SemanticFsm b = parse_fsm_yaml(read_file_or_usage(b_path));
  const EquivVerdict verdict = check_equivalence(a, b);
  if (as_json) {
    std::cout << verdict_to_json(verdict).dump(2) << "\n";
  } else if (verdict.equivalent) {
    std::cout << "equivalent\n";
  } else {
    std::cout << "not equivalent: output " << *verdict.mismatch_output << " diverges at cycle "
              << *verdict.mismatch_cycle << "\n";
    for (const auto& row : verdict.counterexample) {
      std::cout << "  ";
      for (const auto& [name, bit] : row) std::cout << name << "=" << bit << " ";
      std::cout << "\n";
    }
  }
  return verdict.equivalent ? kExitOk : kExitNegative;
}

int cmd_iso(const std::string& graph_path, const std::string& fsm_path,
            const std::string& map_path) {
  const AbstractGraph g = graph_from_json(read_file_or_usage(graph_path));
  const SemanticFsm f = parse_fsm_yaml(read_file_or_usage(fsm_path));
  StateMapping m;
  nlohmann::json mj;
  try {
    mj = nlohmann::json::parse(read_file_or_usage(map_path));
    for (const auto& [key, value] : mj.items()) m.pairs[std::stoi(key)] = value.get<std::string>();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("mapping json: ") + e.what());
  }
  const IsoResult r = check_isomorphism(g, f, m);
  if (r.isomorphic) {
    std::cout << "isomorphic\n";
    return kExitOk;
  }
  std::cout << "not isomorphic: " << r.detail << " (abstract pair " << r.violation->first << ","
            << r.violation->second << ")\n";
  return kExitNegative;
}

int cmd_eval(const std::string& dataset, const std::string& candidates,
             const std::string& pipeline, const std::string& sim_cmd, const std::string& out,
             int jobs, int sim_jobs, int timeout_s, const std::string& config_path) {
  const ConfigFile cfg = load_config(config_path);
  EvalOptions opts;
  opts.pipeline = pipeline;
  opts.sim_cmd = sim_cmd.empty() ? cfg.get("sim_cmd", "") : sim_cmd;
  opts.timeout_s = timeout_s > 0 ? timeout_s : cfg.get_int("timeout", 60);
  opts.jobs = jobs > 0 ? jobs : cfg.get_int("jobs", 0);
  opts.sim_jobs = sim_jobs > 0 ? sim_jobs : cfg.get_int("sim_jobs", 0);

  const nlohmann::json report = evaluate_run(dataset, candidates, opts);
  write_output(out, report.dump(2) + "\n");

  int failures = 0;
  for (const auto& p : report.at("problems"))
    for (const auto& s : p.at("samples"))
      if (s.at("outcome") != "pass") ++failures;
  if (failures > 0) {
    std::cerr << "fsmforge eval: " << failures << " failing sample(s)\n";
    return kExitNegative;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fsmforge: FSM benchmark forge (generate, emit, verify, evaluate)"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "curate a problem dataset");
  std::string gen_tier = "low", gen_provider, gen_out, gen_config;
  int gen_count = 10, gen_jobs = 0;
  uint64_t gen_seed = 0;
  gen->add_option("--tier", gen_tier, "difficulty tier (low|medium|high)")->required();
  gen->add_option("--count", gen_count, "problems to accept")->required();
  gen->add_option("--seed", gen_seed, "base seed");
  gen->add_option("--provider", gen_provider, "semantics provider (mock|llm)");
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--jobs", gen_jobs, "worker count (default: cores)");
  gen->add_option("--config", gen_config, "key=value config file");

  // stats
  auto* stats = app.add_subcommand("stats", "summarize a dataset");
  std::string stats_dir;
  bool stats_json = false;
  stats->add_option("dir", stats_dir, "dataset directory")->required();
  stats->add_flag("--json", stats_json, "emit JSON instead of a table");

  // emit-rtl
  auto* emit_rtl_cmd = app.add_subcommand("emit-rtl", "emit SystemVerilog for an FSM");
  std::string er_fsm, er_encoding = "onehot", er_out;
  emit_rtl_cmd->add_option("fsm", er_fsm, "FSM YAML file")->required();
  emit_rtl_cmd->add_option("--encoding", er_encoding, "state encoding (onehot|binary)");
  emit_rtl_cmd->add_option("-o,--output", er_out, "output file (- for stdout)")->required();

  // emit-tb
  auto* emit_tb_cmd = app.add_subcommand("emit-tb", "emit a self-checking testbench");
  std::string et_fsm, et_golden, et_out;
  emit_tb_cmd->add_option("fsm", et_fsm, "FSM YAML file")->required();
  emit_tb_cmd->add_option("--golden", et_golden, "golden trace CSV")->required();
  emit_tb_cmd->add_option("-o,--output", et_out, "output file (- for stdout)")->required();

  // emit-miter
  auto* emit_miter_cmd = app.add_subcommand("emit-miter", "emit a miter for two FSMs");
  std::string em_a, em_b, em_out;
  emit_miter_cmd->add_option("a", em_a, "first FSM YAML")->required();
  emit_miter_cmd->add_option("b", em_b, "second FSM YAML")->required();
  emit_miter_cmd->add_option("-o,--output", em_out, "output file (- for stdout)")->required();

  // sim
  auto* sim_cmd = app.add_subcommand("sim", "run the cycle-accurate simulator");
  std::string sim_fsm, sim_inputs, sim_out;
  sim_cmd->add_option("fsm", sim_fsm, "FSM YAML file")->required();
  sim_cmd->add_option("--inputs", sim_inputs, "stimulus CSV (cycle,<inputs...>)")->required();
  sim_cmd->add_option("-o,--output", sim_out, "trace CSV output (- for stdout)")->required();

  // equiv
  auto* equiv_cmd = app.add_subcommand("equiv", "product-machine equivalence check");
  std::string eq_a, eq_b;
  bool eq_json = false;
  equiv_cmd->add_option("a", eq_a, "first FSM YAML")->required();
  equiv_cmd->add_option("b", eq_b, "second FSM YAML")->required();
  equiv_cmd->add_flag("--json", eq_json, "emit the verdict as JSON");

  // iso
  auto* iso_cmd = app.add_subcommand("iso", "isomorphism check under a bijection");
  std::string iso_graph, iso_fsm, iso_map;
  iso_cmd->add_option("graph", iso_graph, "abstract graph JSON")->required();
  iso_cmd->add_option("fsm", iso_fsm, "FSM YAML")->required();
  iso_cmd->add_option("map", iso_map, "state mapping JSON ({\"0\": \"NAME\", ...})")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate candidate solutions");
  std::string ev_dataset, ev_candidates, ev_pipeline, ev_sim_cmd, ev_out, ev_config;
  int ev_jobs = 0, ev_sim_jobs = 0, ev_timeout = 0;
  eval_cmd->add_option("--dataset", ev_dataset, "dataset directory")->required();
  eval_cmd->add_option("--candidates", ev_candidates, "candidates directory")->required();
  eval_cmd->add_option("--pipeline", ev_pipeline, "rtl (P1) or yaml (P2)")->required();
  eval_cmd->add_option("--sim-cmd", ev_sim_cmd, "simulator template with {sources} {top}");
  eval_cmd->add_option("-o,--output", ev_out, "report JSON output (- for stdout)")->required();
  eval_cmd->add_option("--jobs", ev_jobs, "worker count (default: cores)");
  eval_cmd->add_option("--sim-jobs", ev_sim_jobs, "simulator concurrency cap");
  eval_cmd->add_option("--timeout", ev_timeout, "per-sample timeout in seconds");
  eval_cmd->add_option("--config", ev_config, "key=value config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "fsmforge: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed())
      return cmd_gen(gen_tier, gen_count, gen_seed, gen_provider, gen_out, gen_jobs, gen_config);
    if (stats->parsed()) return cmd_stats(stats_dir, stats_json);
    if (emit_rtl_cmd->parsed()) return cmd_emit_rtl(er_fsm, er_encoding, er_out);
    if (emit_tb_cmd->parsed()) return cmd_emit_tb(et_fsm, et_golden, et_out);
    if (emit_miter_cmd->parsed()) return cmd_emit_miter(em_a, em_b, em_out);
    if (sim_cmd->parsed()) return cmd_sim(sim_fsm, sim_inputs, sim_out);
    if (equiv_cmd->parsed()) return cmd_equiv(eq_a, eq_b, eq_json);
    if (iso_cmd->parsed()) return cmd_iso(iso_graph, iso_fsm, iso_map);
    if (eval_cmd->parsed())
      return cmd_eval(ev_dataset, ev_candidates, ev_pipeline, ev_sim_cmd, ev_out, ev_jobs,
                      ev_sim_jobs, ev_timeout, ev_config);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "fsmforge: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InterfaceError& e) {
    std::cerr << "fsmforge: interface error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MappingError& e) {
    std::cerr << "fsmforge: mapping error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "fsmforge: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IntegrityError& e) {
    std::cerr << "fsmforge: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ProviderError& e) {
    std::cerr << "fsmforge: provider error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CollisionError& e) {
    std::cerr << "fsmforge: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "fsmforge: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitUsage;
}
