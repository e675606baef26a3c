// SPDX-License-Identifier: Apache-2.0
#include "fsmforge/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "fsmforge/emit.hpp"
#include "fsmforge/stimgen.hpp"
#include "fsmforge/topo.hpp"
#include "fsmforge/verify.hpp"
#include "fsmforge/yaml_io.hpp"

namespace fsmforge {

namespace fs = std::filesystem;

namespace {

std::string hex16(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 0xf];
  return out;
}

int count_lines(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

enum class Stage { ProviderFail, IsoFail, FeasibleFail, ReconFail, EquivFail, Accepted };

struct AttemptOutcome {
  Stage stage = Stage::ProviderFail;
  std::string detail;
  ProblemRecord record;  // meaningful only when accepted
};

AttemptOutcome run_attempt(Tier tier, uint64_t seed, SemanticsProvider& provider,
                           const CurateOptions& opts) {
  AttemptOutcome out;
  const std::string id = problem_id(tier, seed);
  provider.begin_problem(id, seed);

  const GraphSample sample = sample_graph(preset_config(tier, seed));
  const AbstractGraph& g = sample.graph;

  AssignedSemantics assigned;
  try {
    assigned = provider.assign_semantics(g);
  } catch (const ProviderError& e) {
    out.stage = Stage::ProviderFail;
    out.detail = e.what();
    return out;
  } catch (const ReconstructionError& e) {
    out.stage = Stage::ProviderFail;
    out.detail = e.what();
    return out;
  }

  if (const ValidationReport rep = validate_fsm(assigned.fsm); !rep.ok()) {
    out.stage = Stage::ProviderFail;
    out.detail = "provider produced an invalid machine:\n" + rep.to_string();
    return out;
  }

  try {
    if (!check_isomorphism(g, assigned.fsm, assigned.mapping).isomorphic) {
      out.stage = Stage::IsoFail;
      return out;
    }
  } catch (const MappingError& e) {
    out.stage = Stage::IsoFail;
    out.detail = e.what();
    return out;
  }

  const size_t explicit_edges = assigned.fsm.explicit_edge_count();
  StimulusPlan stim;
  try {
    if (feasible_edges(assigned.fsm).size() != explicit_edges) {
      out.stage = Stage::FeasibleFail;
      return out;
    }
    stim = plan(assigned.fsm, seed, static_cast<size_t>(opts.tail_factor) * explicit_edges);
  } catch (const PlanError& e) {
    out.stage = Stage::FeasibleFail;
    out.detail = e.what();
    return out;
  }

  const Simulator sim(assigned.fsm);
  const Trace golden = sim.run(flatten(stim));

  SpecDocument spec;
  SemanticFsm recon;
  try {
    spec = provider.spec_from_fsm(assigned.fsm);
    recon = provider.fsm_from_spec(spec, assigned.mapping, InterfaceSignature::of(assigned.fsm));
  } catch (const ProviderError& e) {
    out.stage = Stage::ProviderFail;
    out.detail = e.what();
    return out;
  } catch (const ReconstructionError& e) {
    out.stage = Stage::ReconFail;
    out.detail = e.what();
    return out;
  }

  try {
    if (!check_equivalence(assigned.fsm, recon).equivalent) {
      out.stage = Stage::EquivFail;
      return out;
    }
  } catch (const InterfaceError& e) {
    out.stage = Stage::EquivFail;
    out.detail = e.what();
    return out;
  }

  ProblemRecord rec;
  rec.id = id;
  rec.tier = tier;
  rec.seed = seed;
  rec.fsm = assigned.fsm;
  rec.mapping = assigned.mapping;
  rec.spec = spec;
  rec.golden = golden;
  rec.stats.n_states = static_cast<int>(assigned.fsm.states.size());
  rec.stats.n_edges = static_cast<int>(g.edges.size());
  rec.stats.n_phases = static_cast<int>(g.phases.size());
  rec.stats.spec_words = spec.word_count;
  rec.stats.rtl_lines = count_lines(emit_rtl(assigned.fsm, StateEncoding::OneHot));
  rec.verdicts = {true, true, true};
  rec.story = assigned.story;
  rec.coverage = coverage_sidecar(assigned.fsm, stim);

  out.stage = Stage::Accepted;
  out.record = std::move(rec);
  return out;
}

}  // namespace

std::string problem_id(Tier tier, uint64_t seed) { return tier_name(tier) + "_" + hex16(seed); }

CurationCounters CurationReport::totals() const {
  CurationCounters t;
  for (const auto& [tier, c] : per_tier) {
    t.attempted += c.attempted;
    t.iso_passed += c.iso_passed;
    t.feasible_passed += c.feasible_passed;
    t.equiv_passed += c.equiv_passed;
    t.accepted += c.accepted;
    t.provider_errors += c.provider_errors;
  }
  return t;
}

std::string CurationReport::to_text() const {
  std::ostringstream out;
  out << "tier      attempted  iso_ok  feasible  equiv_ok  accepted  provider_err\n";
  auto row = [&](const std::string& name, const CurationCounters& c) {
    out << name;
    for (size_t i = name.size(); i < 10; ++i) out << ' ';
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%9d %7d %9d %9d %9d %13d\n", c.attempted, c.iso_passed,
                  c.feasible_passed, c.equiv_passed, c.accepted, c.provider_errors);
    out << buf;
  };
  for (const auto& [tier, c] : per_tier) row(tier_name(tier), c);
  if (per_tier.size() > 1) row("total", totals());
  return out.str();
}

nlohmann::json CurationReport::to_json() const {
  nlohmann::json tiers;
  for (const auto& [tier, c] : per_tier)
    tiers[tier_name(tier)] = {{"attempted", c.attempted},
                              {"iso_passed", c.iso_passed},
                              {"feasible_passed", c.feasible_passed},
                              {"equiv_passed", c.equiv_passed},
                              {"accepted", c.accepted},
                              {"provider_errors", c.provider_errors}};
  return nlohmann::json{{"tiers", tiers}};
}

CurationReport curate(Tier tier, int count, uint64_t base_seed, SemanticsProvider& provider,
                      const fs::path& out_dir, const CurateOptions& opts) {
  fs::create_directories(out_dir);

  CurationReport report;
  CurationCounters& c = report.per_tier[tier];

  const int cap = opts.attempt_cap_factor * count;
  int jobs = opts.jobs > 0 ? opts.jobs
                           : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::max(1, std::min(jobs, cap));

  int next_attempt = 0;
  while (c.accepted < count && next_attempt < cap) {
    const int chunk = std::min(jobs, cap - next_attempt);
    std::vector<std::future<AttemptOutcome>> futures;
    std::vector<std::unique_ptr<SemanticsProvider>> workers;
    futures.reserve(chunk);
    for (int i = 0; i < chunk; ++i) {
      const uint64_t seed = base_seed + static_cast<uint64_t>(next_attempt + i);
      workers.push_back(provider.clone());
      SemanticsProvider* worker = workers.back().get();
      futures.push_back(std::async(std::launch::async, [tier, seed, worker, &opts] {
        return run_attempt(tier, seed, *worker, opts);
      }));
    }
    // commit in attempt order; results past the acceptance target are dropped
    for (int i = 0; i < chunk; ++i) {
      AttemptOutcome outcome = futures[i].get();
      if (c.accepted >= count) continue;
      ++c.attempted;
      ++next_attempt;
      switch (outcome.stage) {
        case Stage::ProviderFail:
          ++c.provider_errors;
          break;
        case Stage::IsoFail:
          break;
        case Stage::FeasibleFail:
          ++c.iso_passed;
          break;
        case Stage::ReconFail:
          ++c.iso_passed;
          ++c.feasible_passed;
          break;
        case Stage::EquivFail:
          ++c.iso_passed;
          ++c.feasible_passed;
          break;
        case Stage::Accepted:
          ++c.iso_passed;
          ++c.feasible_passed;
          ++c.equiv_passed;
          ++c.accepted;
          persist(outcome.record, out_dir);
          break;
      }
    }
    // next_attempt already advanced only for committed results; if the chunk
    // was cut short by acceptance, the loop exits on the accepted count
  }

  if (c.accepted < count)
    throw CurationPartial(report, "attempt cap exhausted: accepted " +
                                      std::to_string(c.accepted) + " of " +
                                      std::to_string(count));
  return report;
}

std::filesystem::path persist(const ProblemRecord& rec, const fs::path& root) {
  if (!(rec.verdicts.iso && rec.verdicts.equiv && rec.verdicts.feasible))
    throw std::invalid_argument("persist requires all verdicts true for " + rec.id);

  const fs::path dir = root / "problems" / tier_name(rec.tier) / rec.id;
  if (fs::exists(dir)) throw CollisionError("problem directory already exists: " + dir.string());

  // manifest collision check before any writes
  nlohmann::json manifest = read_manifest(root);
  for (const auto& p : manifest["problems"])
    if (p.at("id") == rec.id) throw CollisionError("duplicate problem id: " + rec.id);

  fs::create_directories(dir);
  write_file(dir / "problem.yaml", serialize_fsm_yaml(rec.fsm));
  write_file(dir / "spec.md", rec.spec.text());
  write_file(dir / "ref.sv", emit_rtl(rec.fsm, StateEncoding::OneHot));
  write_file(dir / "tb.sv", emit_testbench(rec.fsm, rec.golden));
  write_file(dir / "golden.csv", trace_to_csv(rec.golden));

  nlohmann::json mapping;
  for (const auto& [id, name] : rec.mapping.pairs) mapping[std::to_string(id)] = name;
  nlohmann::json meta{
      {"id", rec.id},
      {"tier", tier_name(rec.tier)},
      {"seed", rec.seed},
      {"stats",
       {{"n_states", rec.stats.n_states},
        {"n_edges", rec.stats.n_edges},
        {"n_phases", rec.stats.n_phases},
        {"spec_words", rec.stats.spec_words},
        {"rtl_lines", rec.stats.rtl_lines}}},
      {"verdicts",
       {{"iso", rec.verdicts.iso}, {"equiv", rec.verdicts.equiv},
        {"feasible", rec.verdicts.feasible}}},
      {"mapping", mapping},
      {"story", rec.story},
      {"coverage", rec.coverage}};
  write_file(dir / "meta.json", meta.dump(2) + "\n");

  manifest["problems"].push_back({{"id", rec.id},
                                  {"tier", tier_name(rec.tier)},
                                  {"n_states", rec.stats.n_states},
                                  {"n_edges", rec.stats.n_edges},
                                  {"n_phases", rec.stats.n_phases},
                                  {"spec_words", rec.stats.spec_words},
                                  {"rtl_lines", rec.stats.rtl_lines},
                                  {"seed", rec.seed}});
  auto& problems = manifest["problems"];
  std::sort(problems.begin(), problems.end(), [](const auto& a, const auto& b) {
    const auto rank = [](const std::string& t) { return t == "low" ? 0 : t == "medium" ? 1 : 2; };
    const int ra = rank(a.at("tier")), rb = rank(b.at("tier"));
    if (ra != rb) return ra < rb;
    return a.at("id").template get<std::string>() < b.at("id").template get<std::string>();
  });
  write_file(root / "manifest.json", manifest.dump(2) + "\n");
  return dir;
}

nlohmann::json read_manifest(const fs::path& root) {
  const fs::path file = root / "manifest.json";
  if (!fs::exists(file)) return nlohmann::json{{"version", 1}, {"problems", nlohmann::json::array()}};
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("manifest.json is corrupt: " + std::string(e.what()));
  }
  if (!manifest.contains("version") || manifest.at("version") != 1 ||
      !manifest.contains("problems") || !manifest.at("problems").is_array())
    throw IntegrityError("manifest.json has an unsupported shape");
  return manifest;
}

ProblemRecord load_problem(const fs::path& dir) {
  ProblemRecord rec;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(dir / "meta.json"));
    rec.id = meta.at("id").get<std::string>();
    const auto tier = tier_from_name(meta.at("tier").get<std::string>());
    if (!tier) throw IntegrityError("unknown tier in " + (dir / "meta.json").string());
    rec.tier = *tier;
    rec.seed = meta.at("seed").get<uint64_t>();
    rec.stats.n_states = meta.at("stats").at("n_states").get<int>();
    rec.stats.n_edges = meta.at("stats").at("n_edges").get<int>();
    rec.stats.n_phases = meta.at("stats").at("n_phases").get<int>();
    rec.stats.spec_words = meta.at("stats").at("spec_words").get<int>();
    rec.stats.rtl_lines = meta.at("stats").at("rtl_lines").get<int>();
    rec.verdicts.iso = meta.at("verdicts").at("iso").get<bool>();
    rec.verdicts.equiv = meta.at("verdicts").at("equiv").get<bool>();
    rec.verdicts.feasible = meta.at("verdicts").at("feasible").get<bool>();
    for (const auto& [key, value] : meta.at("mapping").items())
      rec.mapping.pairs[std::stoi(key)] = value.get<std::string>();
    rec.story = meta.value("story", "");
    rec.coverage = meta.value("coverage", nlohmann::json());
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("meta.json in " + dir.string() + " is corrupt: " + e.what());
  }

  rec.fsm = parse_fsm_yaml(read_file(dir / "problem.yaml"));
  std::vector<std::string> out_names;
  for (const auto& [n, w] : rec.fsm.outputs) out_names.push_back(n);
  rec.golden = trace_from_csv(read_file(dir / "golden.csv"), rec.fsm.inputs, out_names);

  const std::string spec_text = read_file(dir / "spec.md");
  const size_t req_at = spec_text.find("## Requirements");
  if (req_at != std::string::npos) {
    rec.spec.io_section = spec_text.substr(0, req_at);
    while (!rec.spec.io_section.empty() && rec.spec.io_section.back() == '\n')
      rec.spec.io_section.pop_back();
    rec.spec.io_section += "\n";
    rec.spec.requirements_section = spec_text.substr(req_at);
  } else {
    rec.spec.io_section = spec_text;
  }
  rec.spec.word_count = count_words(spec_text);
  rec.source_dir = dir;
  return rec;
}

DatasetStats dataset_stats(const fs::path& root) {
  const nlohmann::json manifest = read_manifest(root);
  if (!fs::exists(root / "manifest.json"))
    throw IntegrityError("no manifest.json under " + root.string());

  std::map<Tier, std::vector<nlohmann::json>> by_tier;
  for (const auto& p : manifest.at("problems")) {
    const auto tier = tier_from_name(p.at("tier").get<std::string>());
    if (!tier) throw IntegrityError("manifest lists an unknown tier");
    by_tier[*tier].push_back(p);
  }

  DatasetStats stats;
  for (const auto& [tier, problems] : by_tier) {
    DatasetRow row;
    row.tier = tier;
    row.count = static_cast<int>(problems.size());
    row.min_states = std::numeric_limits<int>::max();
    row.max_states = 0;
    for (const auto& p : problems) {
      const int n_states = p.at("n_states").get<int>();
      row.min_states = std::min(row.min_states, n_states);
      row.max_states = std::max(row.max_states, n_states);
      row.mean_edges += p.at("n_edges").get<double>();
      row.mean_phases += p.at("n_phases").get<double>();
      row.mean_spec_words += p.at("spec_words").get<double>();
      row.mean_rtl_lines += p.at("rtl_lines").get<double>();
    }
    row.mean_edges /= row.count;
    row.mean_phases /= row.count;
    row.mean_spec_words /= row.count;
    row.mean_rtl_lines /= row.count;
    stats.rows.push_back(row);
  }
  return stats;
}

std::string DatasetStats::to_text() const {
  std::ostringstream out;
  out << "tier      count   states      edges   phases   spec_words   rtl_lines\n";
  for (const DatasetRow& r : rows) {
    const std::string name = tier_name(r.tier);
    out << name;
    for (size_t i = name.size(); i < 10; ++i) out << ' ';
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%5d   %2d-%-2d   %8.2f   %6.2f   %10.1f   %9.1f\n", r.count,
                  r.min_states, r.max_states, r.mean_edges, r.mean_phases, r.mean_spec_words,
                  r.mean_rtl_lines);
    out << buf;
  }
  return out.str();
}

nlohmann::json DatasetStats::to_json() const {
  nlohmann::json tiers;
  for (const DatasetRow& r : rows)
    tiers[tier_name(r.tier)] = {{"count", r.count},
                                {"min_states", r.min_states},
                                {"max_states", r.max_states},
                                {"mean_edges", r.mean_edges},
                                {"mean_phases", r.mean_phases},
                                {"mean_spec_words", r.mean_spec_words},
                                {"mean_rtl_lines", r.mean_rtl_lines}};
  return nlohmann::json{{"tiers", tiers}};
}

std::map<std::string, std::string> parse_kv_config(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      const size_t b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const size_t e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

}  // namespace fsmforge
