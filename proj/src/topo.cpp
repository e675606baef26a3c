// SPDX-License-Identifier: Apache-2.0
#include "fsmforge/topo.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>

#include "json.hpp"

namespace fsmforge {

void validate_config(const TopoConfig& cfg) {
  auto fail = [](const std::string& what) { throw ConfigError("topology config: " + what); };
  if (cfg.num_phases < 1) fail("num_phases must be >= 1");
  if (cfg.states_per_phase.lo < 1 || cfg.states_per_phase.hi < cfg.states_per_phase.lo)
    fail("states_per_phase range is empty");
  for (double p : {cfg.p_forward_branch, cfg.p_back_edge, cfg.p_self_loop})
    if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must lie in [0,1]");
  if (cfg.max_out_degree < 1) fail("max_out_degree must be >= 1");
  if (cfg.num_inter_phase_jumps < 0) fail("num_inter_phase_jumps must be >= 0");
}

PhaseSample sample_phase(const TopoConfig& cfg, Rng& rng, int id_base) {
  const int m = rng.range(cfg.states_per_phase.lo, cfg.states_per_phase.hi);

  PhaseSample ps;
  ps.phase.members.resize(m);
  for (int i = 0; i < m; ++i) ps.phase.members[i] = id_base + i;
  ps.phase.entry = ps.phase.members.front();
  ps.phase.exit = ps.phase.members.back();

  std::vector<int> out_deg(m, 0);
  // exit keeps one slot reserved for the phase-cycle edge
  auto capacity = [&](int pos) {
    return pos == m - 1 ? cfg.max_out_degree - 1 : cfg.max_out_degree;
  };
  auto try_add = [&](int from_pos, int to_pos) {
    if (out_deg[from_pos] + 1 > capacity(from_pos)) return;
    const auto edge = std::make_pair(id_base + from_pos, id_base + to_pos);
    if (ps.edges.insert(edge).second) ++out_deg[from_pos];
  };

  for (int pos = 0; pos + 1 < m; ++pos) try_add(pos, pos + 1);  // minimal chain

  // forward branches, skipping >= 2 positions ahead when the phase allows it
  for (int pos = 0; pos + 1 < m; ++pos) {
    if (!rng.bernoulli(cfg.p_forward_branch)) continue;
    const int lo = pos + 2 <= m - 1 ? pos + 2 : pos + 1;
    try_add(pos, rng.range(lo, m - 1));
  }

  for (int pos = 1; pos < m; ++pos) {
    if (!rng.bernoulli(cfg.p_back_edge)) continue;
    try_add(pos, rng.range(0, pos - 1));
  }

  for (int pos = 0; pos < m; ++pos) {
    if (!rng.bernoulli(cfg.p_self_loop)) continue;
    try_add(pos, pos);
  }

  return ps;
}

GraphSample sample_graph(const TopoConfig& cfg) {
  validate_config(cfg);
  Rng rng(cfg.seed);

  AbstractGraph g;
  g.reset_state = 0;
  int next_id = 1;

  for (int i = 0; i < cfg.num_phases; ++i) {
    PhaseSample ps = sample_phase(cfg, rng, next_id);
    next_id += static_cast<int>(ps.phase.members.size());
    g.phases.push_back(std::move(ps.phase));
    g.edges.insert(ps.edges.begin(), ps.edges.end());
  }
  g.states.resize(next_id);
  for (int i = 0; i < next_id; ++i) g.states[i] = i;

  g.edges.emplace(g.reset_state, g.phases.front().entry);  // reset block

  const int k = cfg.num_phases;
  for (int i = 0; i < k; ++i)
    g.edges.emplace(g.phases[i].exit, g.phases[(i + 1) % k].entry);  // phase cycle

  if (k >= 2) {
    std::map<int, int> deg;
    for (const auto& [u, v] : g.edges) ++deg[u];
    for (int j = 0; j < cfg.num_inter_phase_jumps; ++j) {
      const int src = static_cast<int>(rng.bounded(k));
      const int raw = static_cast<int>(rng.bounded(k - 1));
      const int dst = raw >= src ? raw + 1 : raw;
      const auto edge = std::make_pair(g.phases[src].exit, g.phases[dst].entry);
      if (g.edges.count(edge)) continue;
      if (deg[edge.first] + 1 > cfg.max_out_degree) continue;
      g.edges.insert(edge);
      ++deg[edge.first];
    }
  }

  for (const int s : g.states)
    if (out_degree(g, s) > cfg.max_out_degree)
      throw ConfigError("topology config: mandatory structure exceeds max_out_degree");

  return {std::move(g), cfg};
}

int out_degree(const AbstractGraph& g, int state) {
  int d = 0;
  for (auto it = g.edges.lower_bound({state, std::numeric_limits<int>::min()});
       it != g.edges.end() && it->first == state; ++it)
    ++d;
  return d;
}

namespace {

// Draws one value from a {value -> percent weight} table.
int weighted_pick(Rng& rng, const std::vector<std::pair<int, int>>& table) {
  int total = 0;
  for (const auto& [v, w] : table) total += w;
  int draw = static_cast<int>(rng.bounded(total));
  for (const auto& [v, w] : table) {
    if (draw < w) return v;
    draw -= w;
  }
  return table.back().first;
}

struct TierTuning {
  std::vector<std::pair<int, int>> phase_weights;  // num_phases -> percent
  std::map<int, IntRange> sizes;                   // num_phases -> states_per_phase
  double p_forward_branch;
  double p_back_edge;
  double p_self_loop;
  int max_out_degree;
  int num_inter_phase_jumps;
};

// Tuned so that, over seeds, mean phases land on 2.71 / 5.24 / 8.83 and mean
// edges near 11.95 / 32.17 / 65.39 while 1 + sum(sizes) stays inside the
// tier's state bounds for every possible draw.
const TierTuning& tuning_for(Tier tier) {
  static const TierTuning low{
      {{2, 29}, {3, 71}},
      {{2, {2, 6}}, {3, {1, 4}}},
      0.26, 0.22, 0.17, 4, 1};
  static const TierTuning medium{
      {{4, 20}, {5, 41}, {6, 34}, {7, 5}},
      {{4, {4, 6}}, {5, {3, 5}}, {6, {3, 4}}, {7, {2, 3}}},
      0.27, 0.25, 0.18, 4, 1};
  static const TierTuning high{
      {{7, 30}, {8, 17}, {9, 17}, {10, 12}, {11, 24}},
      {{7, {4, 8}}, {8, {4, 7}}, {9, {3, 6}}, {10, {3, 5}}, {11, {3, 5}}},
      0.25, 0.22, 0.17, 4, 2};
  switch (tier) {
    case Tier::Low:
      return low;
    case Tier::Medium:
      return medium;
    case Tier::High:
      return high;
  }
  return low;
}

constexpr uint64_t kPresetSalt = 0xa5a55a5ac0ffee00ULL;  // keeps preset draws off the graph stream

}  // namespace

TopoConfig preset_config(Tier tier, uint64_t seed) {
  const TierTuning& t = tuning_for(tier);
  Rng rng(seed ^ kPresetSalt);

  TopoConfig cfg;
  cfg.num_phases = weighted_pick(rng, t.phase_weights);
  cfg.states_per_phase = t.sizes.at(cfg.num_phases);
  cfg.p_forward_branch = t.p_forward_branch;
  cfg.p_back_edge = t.p_back_edge;
  cfg.p_self_loop = t.p_self_loop;
  cfg.max_out_degree = t.max_out_degree;
  cfg.num_inter_phase_jumps = t.num_inter_phase_jumps;
  cfg.seed = seed;
  return cfg;
}

std::string graph_to_json(const AbstractGraph& g) {
  nlohmann::ordered_json j;
  j["states"] = g.states;
  j["reset"] = g.reset_state;
  j["phases"] = nlohmann::ordered_json::array();
  for (const Phase& p : g.phases) {
    nlohmann::ordered_json pj;
    pj["entry"] = p.entry;
    pj["exit"] = p.exit;
    pj["members"] = p.members;
    j["phases"].push_back(std::move(pj));
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& [u, v] : g.edges) j["edges"].push_back({u, v});
  return j.dump(2) + "\n";
}

AbstractGraph graph_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("graph json: ") + e.what());
  }
  AbstractGraph g;
  try {
    g.states = j.at("states").get<std::vector<int>>();
    g.reset_state = j.at("reset").get<int>();
    for (const auto& pj : j.at("phases")) {
      Phase p;
      p.entry = pj.at("entry").get<int>();
      p.exit = pj.at("exit").get<int>();
      p.members = pj.at("members").get<std::vector<int>>();
      g.phases.push_back(std::move(p));
    }
    for (const auto& ej : j.at("edges"))
      g.edges.emplace(ej.at(0).get<int>(), ej.at(1).get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("graph json: ") + e.what());
  }
  const auto issues = validate_graph(g);
  if (!issues.empty()) throw ConfigError("graph json: " + issues.front());
  return g;
}

std::vector<std::string> validate_graph(const AbstractGraph& g) {
  std::vector<std::string> issues;
  const std::set<int> declared(g.states.begin(), g.states.end());

  if (declared.size() != g.states.size()) issues.push_back("duplicate state ids");
  if (!declared.count(g.reset_state)) issues.push_back("reset state not declared");

  for (const auto& [u, v] : g.edges)
    if (!declared.count(u) || !declared.count(v)) {
      issues.push_back("edge endpoint not declared: (" + std::to_string(u) + "," +
                       std::to_string(v) + ")");
      return issues;
    }

  std::set<int> phase_owned;
  for (size_t pi = 0; pi < g.phases.size(); ++pi) {
    const Phase& p = g.phases[pi];
    const std::string tag = "phase " + std::to_string(pi);
    if (p.members.empty()) {
      issues.push_back(tag + " has no members");
      continue;
    }
    if (p.members.front() != p.entry || p.members.back() != p.exit)
      issues.push_back(tag + " members must start at entry and end at exit");
    if (p.members.size() > 1 && p.entry == p.exit)
      issues.push_back(tag + " entry equals exit with multiple members");
    for (int s : p.members) {
      if (!declared.count(s)) issues.push_back(tag + " member not declared");
      if (s == g.reset_state) issues.push_back("reset state belongs to " + tag);
      if (!phase_owned.insert(s).second)
        issues.push_back("state " + std::to_string(s) + " in more than one phase");
    }

    // every member must lie on an entry->exit path within the phase edges
    const std::set<int> mem(p.members.begin(), p.members.end());
    auto closure = [&](int start, bool forward) {
      std::set<int> seen{start};
      std::deque<int> work{start};
      while (!work.empty()) {
        const int cur = work.front();
        work.pop_front();
        for (const auto& [u, v] : g.edges) {
          if (!mem.count(u) || !mem.count(v)) continue;
          const int from = forward ? u : v;
          const int to = forward ? v : u;
          if (from == cur && seen.insert(to).second) work.push_back(to);
        }
      }
      return seen;
    };
    const auto from_entry = closure(p.entry, true);
    const auto to_exit = closure(p.exit, false);
    for (int s : p.members)
      if (!from_entry.count(s) || !to_exit.count(s))
        issues.push_back("state " + std::to_string(s) + " off every entry->exit path in " + tag);
  }

  // reachability from reset
  std::set<int> seen{g.reset_state};
  std::deque<int> work{g.reset_state};
  while (!work.empty()) {
    const int cur = work.front();
    work.pop_front();
    for (auto it = g.edges.lower_bound({cur, std::numeric_limits<int>::min()});
         it != g.edges.end() && it->first == cur; ++it)
      if (seen.insert(it->second).second) work.push_back(it->second);
  }
  for (int s : g.states)
    if (!seen.count(s)) issues.push_back("state " + std::to_string(s) + " unreachable from reset");

  return issues;
}

}  // namespace fsmforge
