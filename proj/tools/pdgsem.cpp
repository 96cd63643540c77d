#include <climits>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdgsem/fixtures.hpp"
#include "pdgsem/harness.hpp"

using nlohmann::json;
using namespace pdgsem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitLimit = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Program sources may name a bundled example instead of a file.
Cfg load_cfg(const std::string& path) {
  auto it = fixture_sources().find(path);
  if (it != fixture_sources().end()) return parse_cfg(it->second);
  return parse_cfg(read_file(path));
}

Store load_store(const std::string& init, const std::string& init_file) {
  if (!init_file.empty()) return parse_store(read_file(init_file));
  return parse_store(init);
}

json value_json(const Value& v) {
  if (v.is_int()) return v.as_int();
  return v.truth_value();
}

json store_json(const Store& s) {
  json out = json::object();
  for (const auto& [k, v] : s) out[k] = value_json(v);
  return out;
}

std::string node_set_text(const std::set<NodeId>& s) {
  std::string out = "{";
  bool first = true;
  for (NodeId n : s) {
    if (!first) out += ",";
    out += node_name(n);
    first = false;
  }
  return out + "}";
}

json node_set_json(const std::set<NodeId>& s) {
  json out = json::array();
  for (NodeId n : s) out.push_back(node_name(n));
  return out;
}

int cmd_check(const std::string& file, bool use_json) {
  try {
    Cfg cfg = load_cfg(file);
    if (use_json)
      std::cout << json{{"ok", true}, {"nodes", cfg.nodes.size()},
                        {"edges", cfg.edges.size()}}
                << "\n";
    else
      std::cout << "OK: " << cfg.nodes.size() << " nodes, "
                << cfg.edges.size() << " edges, start "
                << node_name(cfg.start) << "\n";
    return kExitPass;
  } catch (const ParseError& e) {
    if (use_json)
      std::cout << json{{"ok", false}, {"error", e.what()}} << "\n";
    else
      std::cout << "INVALID: " << e.what() << "\n";
    return kExitFail;
  }
}

int cmd_deps(const std::string& file, bool use_json) {
  Cfg cfg = load_cfg(file);
  DependenceSets deps = analyze_dependences(cfg);
  if (use_json) {
    json out;
    out["cd"] = json::array();
    for (const auto& c : deps.cd)
      out["cd"].push_back({{"src", node_name(c.src)},
                           {"dst", node_name(c.dst)},
                           {"label", c.label == EdgeLabel::T ? "T" : "F"}});
    auto dump = [](const std::vector<DataDep>& v) {
      json arr = json::array();
      for (const auto& d : v)
        arr.push_back({{"src", node_name(d.src)},
                       {"dst", node_name(d.dst)},
                       {"var", d.var}});
      return arr;
    };
    out["lidd"] = dump(deps.lidd);
    out["lcdd"] = dump(deps.lcdd);
    out["deford"] = json::array();
    std::set<std::pair<NodeId, NodeId>> pairs;
    for (const auto& d : deps.def_ord) pairs.insert({d.src, d.dst});
    for (const auto& [s, t] : pairs)
      out["deford"].push_back(
          {{"src", node_name(s)}, {"dst", node_name(t)}});
    std::cout << out << "\n";
    return kExitPass;
  }
  for (const auto& c : deps.cd)
    std::cout << "CD " << node_name(c.src) << " " << node_name(c.dst) << " "
              << (c.label == EdgeLabel::T ? "T" : "F") << "\n";
  for (const auto& d : deps.lidd)
    std::cout << "LIDD " << node_name(d.src) << " " << node_name(d.dst)
              << " " << d.var << "\n";
  for (const auto& d : deps.lcdd)
    std::cout << "LCDD " << node_name(d.src) << " " << node_name(d.dst)
              << " " << d.var << "\n";
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (const auto& d : deps.def_ord) pairs.insert({d.src, d.dst});
  for (const auto& [s, t] : pairs)
    std::cout << "DEFORD " << node_name(s) << " " << node_name(t) << "\n";
  return kExitPass;
}

int cmd_pdg(const std::string& file, const std::string& dot_file,
            int subgraph_node, const std::string& mode_str,
            const std::vector<int>& mca_pair, bool use_json) {
  Cfg cfg = load_cfg(file);
  Pdg pdg = build_pdg(cfg);
  if (!dot_file.empty()) {
    std::ofstream out(dot_file);
    if (!out) throw std::runtime_error("cannot write " + dot_file);
    out << export_dot(pdg);
    return kExitPass;
  }
  if (!mode_str.empty() || subgraph_node != INT_MIN) {
    if (mode_str.empty() || subgraph_node == INT_MIN) {
      std::cerr << "--subgraph and --mode must be given together\n";
      return kExitUsage;
    }
    auto mode = parse_mode(mode_str);
    if (!mode) {
      std::cerr << "unknown mode " << mode_str << "\n";
      return kExitUsage;
    }
    PdgAnalysis analysis(pdg);
    auto set = analysis.subgraph(subgraph_node, *mode);
    if (use_json)
      std::cout << json{{"node", node_name(subgraph_node)},
                        {"mode", mode_str},
                        {"set", node_set_json(set)}}
                << "\n";
    else
      std::cout << node_set_text(set) << "\n";
    return kExitPass;
  }
  if (!mca_pair.empty()) {
    PdgAnalysis analysis(pdg);
    auto set = analysis.mca(mca_pair.at(0), mca_pair.at(1));
    if (use_json)
      std::cout << json{{"p", node_name(mca_pair[0])},
                        {"q", node_name(mca_pair[1])},
                        {"mca", node_set_json(set)}}
                << "\n";
    else
      std::cout << node_set_text(set) << "\n";
    return kExitPass;
  }
  if (use_json) {
    json arr = json::array();
    for (const auto& e : pdg.edges)
      arr.push_back({{"kind", kind_name(e.kind)},
                     {"src", node_name(e.src)},
                     {"dst", node_name(e.dst)},
                     {"tag", e.tag}});
    std::cout << json{{"edges", arr}} << "\n";
    return kExitPass;
  }
  for (const auto& e : pdg.edges) std::cout << to_string(e) << "\n";
  return kExitPass;
}

int cmd_run_cfg(const std::string& file, const std::string& init,
                const std::string& init_file, int bound, bool trace,
                bool use_json) {
  Cfg cfg = load_cfg(file);
  Store s0 = load_store(init, init_file);
  CfgTrace trace_out = cfg_run(cfg, s0, bound);
  if (trace) {
    for (size_t i = 0; i < trace_out.steps.size(); i++)
      std::cout << "step " << i << ": node "
                << node_name(trace_out.steps[i].node) << " store "
                << print_store(trace_out.steps[i].before) << "\n";
  }
  const char* verdict =
      trace_out.verdict == CfgTrace::Verdict::Terminated    ? "terminated"
      : trace_out.verdict == CfgTrace::Verdict::BoundExceeded ? "bound-exceeded"
                                                              : "runtime-error";
  if (use_json) {
    json out{{"verdict", verdict},
             {"steps", trace_out.steps.size()},
             {"final_store", store_json(trace_out.final_store)}};
    if (trace_out.returned) out["returned"] = value_json(*trace_out.returned);
    if (!trace_out.error.empty()) out["error"] = trace_out.error;
    std::cout << out << "\n";
  } else {
    std::cout << "verdict: " << verdict << "\n";
    if (trace_out.returned)
      std::cout << "returned: " << to_string(*trace_out.returned) << "\n";
    if (!trace_out.error.empty())
      std::cout << "error: " << trace_out.error << "\n";
    std::cout << "final store: " << print_store(trace_out.final_store)
              << "\n";
  }
  switch (trace_out.verdict) {
    case CfgTrace::Verdict::Terminated:
      return kExitPass;
    case CfgTrace::Verdict::BoundExceeded:
      return kExitLimit;
    case CfgTrace::Verdict::RuntimeError:
      return kExitFail;
  }
  return kExitFail;
}

int cmd_run_pdg(const std::string& file, const std::string& init,
                const std::string& init_file, const std::string& strategy,
                uint64_t seed, int bound, bool trace, bool audit,
                bool use_json) {
  Cfg cfg = load_cfg(file);
  Store s0 = load_store(init, init_file);
  PdgMachine m(cfg);
  Strategy strat =
      strategy == "random" ? Strategy::SeededRandom : Strategy::MinId;

  // The run is re-driven step by step so the trace can show Next sets and
  // the audit can inspect every visited state.
  std::vector<PdgState> visited;
  PdgState s = m.init_state(s0);
  PdgRun run;
  std::mt19937_64 rng(seed);
  run.verdict = PdgRun::Verdict::BoundExceeded;
  for (int i = 0; i < bound; i++) {
    if (audit) visited.push_back(s);
    std::vector<NodeId> next = m.next_nodes(s);
    if (next.empty()) {
      run.verdict = PdgRun::Verdict::Quiescent;
      break;
    }
    NodeId n = next[0];
    if (strat == Strategy::SeededRandom && next.size() > 1)
      n = next[std::uniform_int_distribution<size_t>(0, next.size() - 1)(rng)];
    if (trace) {
      std::set<NodeId> ns(next.begin(), next.end());
      std::cout << "step " << i << ": exec " << node_name(n) << "; Next was "
                << node_set_text(ns) << "\n";
    }
    try {
      PdgState after = m.step(s, n);
      run.executed.push_back(n);
      if (n == m.ret_node()) {
        run.ret_executed = true;
        run.returned = m.avail_value(s, n, m.ret_var());
      }
      s = std::move(after);
    } catch (const EvalError& err) {
      run.verdict = PdgRun::Verdict::RuntimeError;
      run.error = err.what();
      break;
    }
  }
  run.final_state = s;
  if (run.ret_executed)
    run.returned_final = m.avail_value(s, m.ret_node(), m.ret_var());

  size_t audit_failures = 0;
  if (audit) {
    AuditReport rep = lemma_audit(m, visited, false);
    audit_failures = rep.failures.size();
    for (const auto& f : rep.failures) std::cout << "audit: " << f << "\n";
  }

  const char* verdict =
      run.verdict == PdgRun::Verdict::Quiescent       ? "quiescent"
      : run.verdict == PdgRun::Verdict::BoundExceeded ? "bound-exceeded"
                                                      : "runtime-error";
  if (use_json) {
    json out{{"verdict", verdict},
             {"steps", run.executed.size()},
             {"ret_executed", run.ret_executed},
             {"audit_failures", audit_failures}};
    if (run.returned) out["returned"] = value_json(*run.returned);
    if (!run.error.empty()) out["error"] = run.error;
    std::cout << out << "\n";
  } else {
    std::cout << "verdict: " << verdict << " after " << run.executed.size()
              << " steps\n";
    if (run.returned)
      std::cout << "returned: " << to_string(*run.returned) << "\n";
    if (run.verdict == PdgRun::Verdict::Quiescent && !run.ret_executed)
      std::cout << "stuck: quiescent without executing ret\n";
    if (!run.error.empty()) std::cout << "error: " << run.error << "\n";
  }
  if (audit_failures > 0) return kExitFail;
  switch (run.verdict) {
    case PdgRun::Verdict::Quiescent:
      return kExitPass;
    case PdgRun::Verdict::BoundExceeded:
      return kExitLimit;
    case PdgRun::Verdict::RuntimeError:
      return kExitFail;
  }
  return kExitFail;
}

int cmd_explore(const std::string& file, const std::string& init,
                const std::string& init_file, size_t max_states,
                size_t max_depth, bool use_json) {
  Cfg cfg = load_cfg(file);
  Store s0 = load_store(init, init_file);
  PdgMachine m(cfg);
  Exploration ex = explore_all(m, s0, max_states, max_depth);
  const char* verdict =
      ex.verdict == Exploration::Verdict::Complete     ? "complete"
      : ex.verdict == Exploration::Verdict::StateLimit ? "state-limit"
      : ex.verdict == Exploration::Verdict::DepthLimit ? "depth-limit"
                                                       : "runtime-error";
  json lengths = json::object();
  for (const auto& [len, n] : ex.run_length_histogram)
    lengths[std::to_string(len)] = n;
  json returns = json::array();
  for (const auto& v : ex.return_values) returns.push_back(value_json(v));
  if (use_json) {
    std::cout << json{{"verdict", verdict},
                      {"states", ex.state_count},
                      {"transitions", ex.transition_count},
                      {"final_states", ex.final_states.size()},
                      {"stuck_states", ex.stuck_states.size()},
                      {"run_lengths", lengths},
                      {"returns", returns}}
              << "\n";
  } else {
    std::cout << "verdict: " << verdict << "\n"
              << "states: " << ex.state_count
              << ", transitions: " << ex.transition_count << "\n"
              << "final states: " << ex.final_states.size()
              << ", stuck states: " << ex.stuck_states.size() << "\n";
    std::cout << "run lengths:";
    for (const auto& [len, n] : ex.run_length_histogram)
      std::cout << " " << len << "x" << n;
    std::cout << "\nreturns:";
    for (const auto& v : ex.return_values) std::cout << " " << to_string(v);
    std::cout << "\n";
  }
  if (ex.verdict == Exploration::Verdict::Complete) return kExitPass;
  if (ex.verdict == Exploration::Verdict::RuntimeError) return kExitFail;
  return kExitLimit;
}

int cmd_dpdg(const std::string& file, bool use_json) {
  Cfg cfg = load_cfg(file);
  DpdgReport report = check_dpdg(build_pdg(cfg));
  if (use_json) {
    json arr = json::array();
    for (const auto& v : report.violations)
      arr.push_back({{"condition", v.condition}, {"witness", v.witness}});
    std::cout << json{{"deterministic", report.deterministic},
                      {"violations", arr}}
              << "\n";
  } else if (report.deterministic) {
    std::cout << "DETERMINISTIC\n";
  } else {
    for (const auto& v : report.violations)
      std::cout << "VIOLATION cond=" << v.condition << " witness=" << v.witness
                << "\n";
  }
  return report.deterministic ? kExitPass : kExitFail;
}

int cmd_equiv(const std::string& file, const std::string& init,
              const std::string& init_file, int bound, bool use_json) {
  Cfg cfg = load_cfg(file);
  Store s0 = load_store(init, init_file);
  EquivResult res = check_equivalence(cfg, s0, bound);
  const char* verdict = res.verdict == EquivResult::Verdict::Pass   ? "pass"
                        : res.verdict == EquivResult::Verdict::Fail ? "fail"
                                                                    : "skipped";
  if (use_json) {
    json returns = json::array();
    for (const auto& v : res.pdg_returned) returns.push_back(value_json(v));
    json out{{"verdict", verdict},
             {"guided_ok", res.guided_ok},
             {"explored", res.explored},
             {"pdg_returns", returns}};
    if (res.cfg_returned) out["cfg_returned"] = value_json(*res.cfg_returned);
    if (!res.detail.empty()) out["detail"] = res.detail;
    std::cout << out << "\n";
  } else {
    std::cout << "verdict: " << verdict << "\n";
    if (!res.detail.empty()) std::cout << res.detail << "\n";
    if (res.cfg_returned)
      std::cout << "cfg returned: " << to_string(*res.cfg_returned) << "\n";
  }
  switch (res.verdict) {
    case EquivResult::Verdict::Pass:
      return kExitPass;
    case EquivResult::Verdict::Fail:
      return kExitFail;
    case EquivResult::Verdict::Skipped:
      return kExitLimit;
  }
  return kExitFail;
}

int cmd_fuzz(uint64_t seed, size_t count, const RandomCfgParams& params,
             bool use_json) {
  FuzzReport report = fuzz_campaign(seed, count, params);
  if (use_json) {
    std::cout << json{{"seed", report.seed},
                      {"count", report.count},
                      {"programs", report.programs},
                      {"terminated", report.terminated},
                      {"deterministic", report.deterministic},
                      {"condition23_violations",
                       report.condition_violations_23},
                      {"static_lemma_failures", report.static_lemma_failures},
                      {"guided_failures", report.guided_failures},
                      {"equivalence_failures", report.equivalence_failures},
                      {"confluence_checked", report.confluence_checked},
                      {"confluence_failures", report.confluence_failures},
                      {"confluence_alarms", report.confluence_alarms},
                      {"audit_failures", report.audit_failures},
                      {"stuck_states", report.stuck_states},
                      {"failures", report.failure_lines},
                      {"clean", report.clean()}}
              << "\n";
  } else {
    std::cout << report.text();
  }
  return report.clean() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dependence-graph analysis and dual-interpreter toolkit"};
  app.require_subcommand(1);

  std::string file, init, init_file, dot_file, mode_str, strategy = "min-id";
  bool use_json = false, trace = false, audit = false;
  int bound = kDefaultCfgBound;
  uint64_t seed = 0;
  size_t count = 100, max_states = kDefaultMaxStates,
         max_depth = kDefaultMaxDepth;
  int subgraph_node = INT_MIN;
  std::vector<int> mca_pair;
  RandomCfgParams params;

  auto add_file = [&](CLI::App* cmd) {
    cmd->add_option("file", file, "program file or bundled example name")
        ->required();
    cmd->add_flag("--json", use_json, "emit JSON");
  };
  auto add_init = [&](CLI::App* cmd) {
    cmd->add_option("--init", init, "initial store, e.g. x=1,y=T");
    cmd->add_option("--init-file", init_file,
                    "file with one binding per line");
  };

  auto* check = app.add_subcommand("check", "parse and validate a program");
  add_file(check);

  auto* deps = app.add_subcommand("deps", "print dependence relations");
  add_file(deps);

  auto* pdg = app.add_subcommand("pdg", "build and inspect the PDG");
  add_file(pdg);
  pdg->add_option("--dot", dot_file, "write DOT to this file");
  pdg->add_option("--subgraph", subgraph_node, "subgraph root node");
  pdg->add_option("--mode", mode_str, "G|GT|GF|GS|GTS|GFS");
  pdg->add_option("--mca", mca_pair, "two nodes")->expected(2);

  auto* run_cfg = app.add_subcommand("run-cfg", "run the CFG interpreter");
  add_file(run_cfg);
  add_init(run_cfg);
  run_cfg->add_option("--bound", bound, "step bound");
  run_cfg->add_flag("--trace", trace, "print each step");

  auto* run_pdg = app.add_subcommand("run-pdg", "run the PDG interpreter");
  add_file(run_pdg);
  add_init(run_pdg);
  run_pdg->add_option("--strategy", strategy, "min-id|random");
  run_pdg->add_option("--seed", seed, "random strategy seed");
  run_pdg->add_option("--bound", bound, "step bound");
  run_pdg->add_flag("--trace", trace, "print each step");
  run_pdg->add_flag("--audit", audit, "check executable-pair invariants");

  auto* explore = app.add_subcommand("explore", "explore all interleavings");
  add_file(explore);
  add_init(explore);
  explore->add_option("--max-states", max_states, "state limit");
  explore->add_option("--max-depth", max_depth, "depth limit");

  auto* dpdg = app.add_subcommand("dpdg", "determinism check");
  add_file(dpdg);

  auto* equiv = app.add_subcommand("equiv", "CFG/PDG equivalence check");
  add_file(equiv);
  add_init(equiv);
  equiv->add_option("--bound", bound, "step bound");

  auto* fuzz = app.add_subcommand("fuzz", "random differential campaign");
  fuzz->add_option("--seed", seed, "campaign seed");
  fuzz->add_option("--count", count, "number of programs");
  fuzz->add_option("--max-nodes", params.max_nodes, "node budget");
  fuzz->add_option("--loop-bias", params.loop_bias, "loop probability");
  fuzz->add_option("--max-vars", params.max_vars, "variable pool size");
  fuzz->add_flag("--json", use_json, "emit JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(file, use_json);
    if (deps->parsed()) return cmd_deps(file, use_json);
    if (pdg->parsed())
      return cmd_pdg(file, dot_file, subgraph_node, mode_str, mca_pair,
                     use_json);
    if (run_cfg->parsed())
      return cmd_run_cfg(file, init, init_file, bound, trace, use_json);
    if (run_pdg->parsed())
      return cmd_run_pdg(file, init, init_file, strategy, seed, bound, trace,
                         audit, use_json);
    if (explore->parsed())
      return cmd_explore(file, init, init_file, max_states, max_depth,
                         use_json);
    if (dpdg->parsed()) return cmd_dpdg(file, use_json);
    if (equiv->parsed()) return cmd_equiv(file, init, init_file, bound, use_json);
    if (fuzz->parsed()) return cmd_fuzz(seed, count, params, use_json);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
