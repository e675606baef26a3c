// SPDX-License-Identifier: Apache-2.0
#include "fsmforge/eval.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "fsmforge/emit.hpp"
#include "fsmforge/sim.hpp"
#include "fsmforge/yaml_io.hpp"

namespace fsmforge {

namespace fs = std::filesystem;

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Pass:
      return "pass";
    case Outcome::CompileFail:
      return "compile_fail";
    case Outcome::ParseFail:
      return "parse_fail";
    case Outcome::Mismatch:
      return "mismatch";
    case Outcome::ToolError:
      return "tool_error";
  }
  return "?";
}

nlohmann::json EvalVerdict::to_json() const {
  nlohmann::json j{{"outcome", outcome_name(outcome)}};
  if (outcome == Outcome::Mismatch) {
    j["cycle"] = mismatch_cycle;
    j["signal"] = mismatch_signal;
  }
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

double pass_at_k(int n, int c, int k) {
  if (c < 0 || c > n || k < 1 || k > n)
    throw std::out_of_range("pass_at_k requires 0 <= c <= n and 1 <= k <= n");
  double miss = 1.0;
  for (int i = 0; i < k; ++i) {
    if (n - c - i <= 0) return 1.0;
    miss *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
  }
  return 1.0 - miss;
}

EvalVerdict eval_yaml_candidate(const ProblemRecord& rec, const std::string& candidate_yaml) {
  EvalVerdict v;
  v.problem_id = rec.id;
  v.pipeline = "P2";

  SemanticFsm candidate;
  try {
    candidate = parse_fsm_yaml(candidate_yaml);
  } catch (const std::exception& e) {
    v.outcome = Outcome::ParseFail;
    v.detail = e.what();
    return v;
  }

  const std::set<std::string> want_in(rec.fsm.inputs.begin(), rec.fsm.inputs.end());
  const std::set<std::string> got_in(candidate.inputs.begin(), candidate.inputs.end());
  const std::map<std::string, int> want_out(rec.fsm.outputs.begin(), rec.fsm.outputs.end());
  const std::map<std::string, int> got_out(candidate.outputs.begin(), candidate.outputs.end());
  if (want_in != got_in || want_out != got_out) {
    v.outcome = Outcome::ParseFail;
    v.detail = "candidate interface does not match the reference inputs/outputs";
    return v;
  }

  const Simulator sim(candidate);
  int cur = sim.reset_index();
  for (size_t t = 0; t < rec.golden.rows.size(); ++t) {
    const TraceRow& row = rec.golden.rows[t];
    for (size_t oi = 0; oi < rec.fsm.outputs.size(); ++oi) {
      const std::string& name = rec.fsm.outputs[oi].first;
      // candidate may declare outputs in a different order; resolve by name
      uint64_t got = 0;
      for (size_t cj = 0; cj < candidate.outputs.size(); ++cj)
        if (candidate.outputs[cj].first == name) {
          got = sim.outputs_of(cur)[cj];
          break;
        }
      if (got != row.outputs.at(name)) {
        v.outcome = Outcome::Mismatch;
        v.mismatch_cycle = static_cast<int>(t);
        v.mismatch_signal = name;
        return v;
      }
    }
    cur = sim.step_mask(cur, mask_from_valuation(candidate.inputs, row.inputs), nullptr);
  }
  v.outcome = Outcome::Pass;
  return v;
}

namespace {

struct CommandResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;  // stdout + stderr interleaved
};

CommandResult run_command(const std::string& command, int timeout_s) {
  CommandResult result;

  int pipe_fd[2];
  if (::pipe(pipe_fd) != 0) throw std::runtime_error("pipe() failed");

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(pipe_fd[0]);
    ::close(pipe_fd[1]);
    throw std::runtime_error("fork() failed");
  }
  if (pid == 0) {
    ::dup2(pipe_fd[1], STDOUT_FILENO);
    ::dup2(pipe_fd[1], STDERR_FILENO);
    ::close(pipe_fd[0]);
    ::close(pipe_fd[1]);
    ::setpgid(0, 0);  // own process group so the whole tree can be killed
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  ::close(pipe_fd[1]);

  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::seconds(timeout_s);
  char buf[4096];
  bool open = true;
  while (open) {
    struct pollfd pfd{pipe_fd[0], POLLIN, 0};
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                               deadline - std::chrono::steady_clock::now())
                               .count();
    if (remaining <= 0) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      break;
    }
    const int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining, 500)));
    if (rc > 0) {
      const ssize_t n = ::read(pipe_fd[0], buf, sizeof(buf));
      if (n > 0)
        result.output.append(buf, static_cast<size_t>(n));
      else
        open = false;  // EOF
    }
  }
  ::close(pipe_fd[0]);

  int status = 0;
  ::waitpid(pid, &status, 0);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

// first whitespace-separated token of the template must resolve as a binary
void check_sim_binary(const std::string& tmpl) {
  std::istringstream in(tmpl);
  std::string head;
  if (!(in >> head)) throw ConfigError("sim command template is empty");
  if (head.find('/') != std::string::npos) {
    if (::access(head.c_str(), X_OK) != 0)
      throw ConfigError("simulator binary not executable: " + head);
    return;
  }
  const char* path_env = std::getenv("PATH");
  std::istringstream paths(path_env ? path_env : "");
  std::string dir;
  while (std::getline(paths, dir, ':')) {
    if (dir.empty()) continue;
    if (::access((dir + "/" + head).c_str(), X_OK) == 0) return;
  }
  throw ConfigError("simulator binary not found on PATH: " + head);
}

std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
  const std::string token = "{" + key + "}";
  for (size_t pos = tmpl.find(token); pos != std::string::npos; pos = tmpl.find(token, pos))
    tmpl.replace(pos, token.size(), value);
  return tmpl;
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

}  // namespace

EvalVerdict eval_rtl_candidate(const ProblemRecord& rec, const fs::path& candidate_sv,
                               const SimCommand& sim) {
  check_sim_binary(sim.tmpl);

  EvalVerdict v;
  v.problem_id = rec.id;
  v.pipeline = "P1";

  // testbench from the dataset when available, else re-emitted
  fs::path tb_path;
  fs::path scratch;
  if (!rec.source_dir.empty() && fs::exists(rec.source_dir / "tb.sv")) {
    tb_path = rec.source_dir / "tb.sv";
  } else {
    scratch = fs::temp_directory_path() / ("fsmforge_tb_" + rec.id + ".sv");
    write_file(scratch, emit_testbench(rec.fsm, rec.golden));
    tb_path = scratch;
  }

  std::string cmd = substitute(sim.tmpl, "sources",
                               candidate_sv.string() + " " + tb_path.string());
  cmd = substitute(cmd, "top", rec.fsm.name + "_tb");

  const CommandResult run = run_command(cmd, sim.timeout_s);
  if (!scratch.empty()) fs::remove(scratch);

  if (run.timed_out) {
    v.outcome = Outcome::ToolError;
    v.detail = "timeout after " + std::to_string(sim.timeout_s) + "s";
    return v;
  }

  const size_t fail_at = run.output.find(kFailSentinel);
  if (run.output.find(kPassSentinel) != std::string::npos) {
    v.outcome = Outcome::Pass;
    return v;
  }
  if (fail_at != std::string::npos) {
    v.outcome = Outcome::Mismatch;
    int cycle = -1;
    char signal[256] = {0};
    if (std::sscanf(run.output.c_str() + fail_at, "LLMFSM_FAIL cycle=%d signal=%255s", &cycle,
                    signal) >= 1) {
      v.mismatch_cycle = cycle;
      v.mismatch_signal = signal;
    }
    return v;
  }
  if (run.exit_code != 0) {
    v.outcome = Outcome::CompileFail;
    v.detail = "tool exited with " + std::to_string(run.exit_code);
    return v;
  }
  v.outcome = Outcome::ToolError;
  v.detail = "no sentinel in simulator output";
  return v;
}

namespace {

struct ProblemEval {
  std::string id;
  Tier tier = Tier::Low;
  std::vector<EvalVerdict> samples;
  bool missing = false;
};

class Gate {  // bounded concurrency for external simulator calls
 public:
  explicit Gate(int slots) : slots_(slots) {}
  void enter() {
    std::unique_lock<std::mutex> lock(m_);
    cv_.wait(lock, [&] { return slots_ > 0; });
    --slots_;
  }
  void leave() {
    {
      std::lock_guard<std::mutex> lock(m_);
      ++slots_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  int slots_;
};

}  // namespace

nlohmann::json evaluate_run(const fs::path& dataset_root, const fs::path& candidates_dir,
                            const EvalOptions& opts) {
  const bool rtl = opts.pipeline == "rtl";
  if (!rtl && opts.pipeline != "yaml")
    throw ConfigError("pipeline must be 'rtl' or 'yaml', got '" + opts.pipeline + "'");
  if (rtl) {
    if (opts.sim_cmd.empty()) throw ConfigError("pipeline rtl requires a sim command template");
    check_sim_binary(opts.sim_cmd);
  }
  const std::string extension = rtl ? ".sv" : ".yaml";

  const nlohmann::json manifest = read_manifest(dataset_root);
  if (!fs::exists(dataset_root / "manifest.json"))
    throw IntegrityError("no manifest.json under " + dataset_root.string());

  int jobs = opts.jobs > 0 ? opts.jobs
                           : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  Gate sim_gate(opts.sim_jobs > 0 ? opts.sim_jobs : jobs);

  std::vector<ProblemEval> evals;
  for (const auto& p : manifest.at("problems")) {
    ProblemEval pe;
    pe.id = p.at("id").get<std::string>();
    pe.tier = *tier_from_name(p.at("tier").get<std::string>());
    evals.push_back(std::move(pe));
  }

  // resolve candidate files up front so missing problems are known exactly
  std::vector<std::vector<fs::path>> files(evals.size());
  for (size_t i = 0; i < evals.size(); ++i) {
    const fs::path dir = candidates_dir / evals[i].id;
    if (fs::is_directory(dir)) {
      for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("sample_", 0) == 0 && e.path().extension() == extension)
          files[i].push_back(e.path());
      }
      std::sort(files[i].begin(), files[i].end());
    }
    evals[i].missing = files[i].empty();
  }

  // evaluate problems in a bounded pool; aggregation order is fixed by index
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < evals.size(); i = next.fetch_add(1)) {
      if (evals[i].missing) continue;
      const ProblemRecord rec =
          load_problem(dataset_root / "problems" / tier_name(evals[i].tier) / evals[i].id);
      for (const fs::path& file : files[i]) {
        if (rtl) {
          sim_gate.enter();
          EvalVerdict v;
          try {
            v = eval_rtl_candidate(rec, file, {opts.sim_cmd, opts.timeout_s});
          } catch (...) {
            sim_gate.leave();
            throw;
          }
          sim_gate.leave();
          evals[i].samples.push_back(std::move(v));
        } else {
          evals[i].samples.push_back(eval_yaml_candidate(rec, read_file(file)));
        }
      }
    }
  };
  std::vector<std::future<void>> pool;
  for (int j = 0; j < jobs; ++j) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();

  // aggregate
  nlohmann::json problems = nlohmann::json::array();
  std::map<Tier, std::vector<std::pair<int, int>>> by_tier;  // (n, c) per evaluated problem
  int evaluated = 0, missing = 0;
  for (const ProblemEval& pe : evals) {
    nlohmann::json pj{{"id", pe.id}, {"tier", tier_name(pe.tier)}};
    if (pe.missing) {
      ++missing;
      pj["missing"] = true;
      pj["samples"] = nlohmann::json::array();
    } else {
      ++evaluated;
      int correct = 0;
      nlohmann::json samples = nlohmann::json::array();
      for (const EvalVerdict& v : pe.samples) {
        if (v.outcome == Outcome::Pass) ++correct;
        samples.push_back(v.to_json());
      }
      pj["samples"] = std::move(samples);
      by_tier[pe.tier].push_back({static_cast<int>(pe.samples.size()), correct});
    }
    problems.push_back(std::move(pj));
  }

  nlohmann::json tiers;
  for (const auto& pe : evals) {
    const std::string name = tier_name(pe.tier);
    if (tiers.contains(name)) continue;
    const auto it = by_tier.find(pe.tier);
    if (it == by_tier.end() || it->second.empty()) {
      tiers[name] = {{"pass_at", nullptr}};
      continue;
    }
    int min_samples = std::numeric_limits<int>::max();
    for (const auto& [n, c] : it->second) min_samples = std::min(min_samples, n);
    nlohmann::json pass_at;
    for (int k : {1, 2, 4, 8, 16}) {
      if (k > min_samples) continue;
      double total = 0;
      for (const auto& [n, c] : it->second) total += pass_at_k(n, c, k);
      pass_at[std::to_string(k)] = total / static_cast<double>(it->second.size());
    }
    tiers[name] = {{"pass_at", std::move(pass_at)}};
  }

  return nlohmann::json{{"pipeline", rtl ? "P1" : "P2"},
                        {"totals", {{"evaluated", evaluated}, {"missing", missing}}},
                        {"tiers", std::move(tiers)},
                        {"problems", std::move(problems)}};
}

}  // namespace fsmforge
