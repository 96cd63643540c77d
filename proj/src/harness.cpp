#include "pdgsem/harness.hpp"

#include <algorithm>
#include <cstdio>

namespace pdgsem {

namespace {

// One frontier entry: the state plus what the run observed so far.
struct Item {
  PdgState state;
  bool ret_executed = false;
  std::optional<Value> returned;

  auto operator<=>(const Item&) const = default;
};

}  // namespace

Exploration explore_all(const PdgMachine& m, const Store& init,
                        size_t max_states, size_t max_depth) {
  Exploration out;
  std::set<Item> frontier{{m.init_state(init), false, std::nullopt}};
  std::set<PdgState> seen;
  size_t depth = 0;

  while (!frontier.empty()) {
    if (depth > max_depth) {
      out.verdict = Exploration::Verdict::DepthLimit;
      break;
    }
    std::set<Item> next_frontier;
    for (const Item& item : frontier) {
      if (seen.insert(item.state).second) {
        out.states.push_back(item.state);
        if (seen.size() > max_states) {
          out.verdict = Exploration::Verdict::StateLimit;
          out.state_count = seen.size();
          return out;
        }
      }
      std::vector<NodeId> next = m.next_nodes(item.state);
      if (next.empty()) {
        out.run_length_histogram[depth]++;
        if (item.ret_executed) {
          out.final_states.insert(item.state);
          if (item.returned) out.return_values.insert(*item.returned);
        } else {
          out.stuck_states.insert(item.state);
        }
        continue;
      }
      for (NodeId n : next) {
        try {
          Item succ;
          succ.state = m.step(item.state, n);
          succ.ret_executed = item.ret_executed || n == m.ret_node();
          succ.returned = item.returned;
          if (n == m.ret_node())
            succ.returned = m.avail_value(item.state, n, m.ret_var());
          out.transition_count++;
          next_frontier.insert(std::move(succ));
        } catch (const EvalError& err) {
          out.verdict = Exploration::Verdict::RuntimeError;
          out.error = err.what();
          out.state_count = seen.size();
          return out;
        }
      }
    }
    frontier = std::move(next_frontier);
    depth++;
  }
  out.state_count = seen.size();
  return out;
}

ConfluenceResult check_confluence(const Exploration& e, const DpdgReport& d) {
  ConfluenceResult res;
  if (e.verdict != Exploration::Verdict::Complete) {
    res.detail = "exploration incomplete";
    return res;
  }
  size_t outcomes = e.final_states.size() + e.stuck_states.size();
  bool single_state = outcomes <= 1;
  bool single_length = e.run_length_histogram.size() <= 1;
  res.pass = single_state && single_length;
  if (!res.pass) {
    res.detail = std::to_string(outcomes) + " quiescent states over " +
                 std::to_string(e.run_length_histogram.size()) +
                 " distinct run lengths";
    if (d.deterministic) res.alarm = true;
  }
  return res;
}

EquivResult check_equivalence(const Cfg& cfg, const Store& init, int bound) {
  EquivResult res;
  CfgTrace trace = cfg_run(cfg, init, bound);
  if (trace.verdict != CfgTrace::Verdict::Terminated) {
    res.detail = trace.verdict == CfgTrace::Verdict::BoundExceeded
                     ? "skipped: cfg bound exceeded"
                     : "skipped: cfg runtime error: " + trace.error;
    return res;
  }
  res.cfg_returned = trace.returned;

  PdgMachine m(cfg);
  GuidedResult guided = guided_run(m, init, trace);
  res.guided_ok = guided.ok;
  if (!guided.ok) {
    res.verdict = EquivResult::Verdict::Fail;
    res.detail = "guided run failed: " + guided.reason;
    return res;
  }
  if (guided.run.returned) res.pdg_returned.insert(*guided.run.returned);
  if (guided.run.returned && guided.run.returned_final &&
      *guided.run.returned != *guided.run.returned_final) {
    res.verdict = EquivResult::Verdict::Fail;
    res.detail = "return value changed after the ret node executed";
    return res;
  }

  Exploration ex = explore_all(m, init);
  if (ex.verdict == Exploration::Verdict::Complete) {
    res.explored = true;
    res.pdg_returned.insert(ex.return_values.begin(), ex.return_values.end());
  } else {
    for (uint64_t s = 0; s < 32; s++) {
      PdgRun run = m.run(init, Strategy::SeededRandom, s, bound);
      if (run.verdict == PdgRun::Verdict::Quiescent && run.returned)
        res.pdg_returned.insert(*run.returned);
    }
  }

  for (const Value& v : res.pdg_returned) {
    if (!res.cfg_returned || v != *res.cfg_returned) {
      res.verdict = EquivResult::Verdict::Fail;
      res.detail = "return mismatch: cfg " +
                   (res.cfg_returned ? to_string(*res.cfg_returned)
                                     : std::string("none")) +
                   ", pdg " + to_string(v);
      return res;
    }
  }
  res.verdict = EquivResult::Verdict::Pass;
  return res;
}

AuditReport lemma_audit(const PdgMachine& m,
                        const std::vector<PdgState>& states,
                        bool deterministic) {
  AuditReport report;
  const auto& edges = m.pdg().edges;

  auto fl_between = [&](NodeId a, NodeId b) {
    for (const auto& e : edges)
      if ((e.kind == EdgeKind::F || e.kind == EdgeKind::L) &&
          ((e.src == a && e.dst == b) || (e.src == b && e.dst == a)))
        return true;
    return false;
  };
  auto shared_f_target = [&](NodeId a, NodeId b) {
    for (const auto& e1 : edges) {
      if (e1.kind != EdgeKind::F || e1.src != a) continue;
      for (const auto& e2 : edges)
        if (e2.kind == EdgeKind::F && e2.src == b && e2.dst == e1.dst &&
            e2.tag == e1.tag)
          return true;
    }
    return false;
  };

  for (const PdgState& s : states) {
    report.states_checked++;
    std::vector<NodeId> next = m.next_nodes(s);
    for (size_t i = 0; i < next.size(); i++) {
      for (size_t j = i + 1; j < next.size(); j++) {
        NodeId p = next[i], q = next[j];
        report.pairs_checked++;

        if (m.analysis().subgraph(q, SubgraphMode::GS).count(p) ||
            m.analysis().subgraph(p, SubgraphMode::GS).count(q))
          report.failures.push_back("executable pair " + node_name(p) + "," +
                                    node_name(q) +
                                    " not mutually subgraph-exclusive");
        if (fl_between(p, q))
          report.failures.push_back("executable pair " + node_name(p) + "," +
                                    node_name(q) + " connected by F/L edge");
        if (!deterministic) continue;

        if (shared_f_target(p, q))
          report.failures.push_back("executable pair " + node_name(p) + "," +
                                    node_name(q) +
                                    " share a flow target and variable");
        auto gp = m.analysis().subgraph(p, SubgraphMode::G);
        auto gq = m.analysis().subgraph(q, SubgraphMode::G);
        for (NodeId n : gp)
          if (gq.count(n)) {
            report.failures.push_back("executable pair " + node_name(p) +
                                      "," + node_name(q) +
                                      " with intersecting subgraphs");
            break;
          }
        try {
          PdgState sq = m.step(s, q);
          if (!m.executable(sq, p)) {
            report.failures.push_back("executing " + node_name(q) +
                                      " disabled " + node_name(p));
            continue;
          }
          PdgState sp = m.step(s, p);
          if (!m.executable(sp, q)) {
            report.failures.push_back("executing " + node_name(p) +
                                      " disabled " + node_name(q));
            continue;
          }
          if (m.step(sp, q) != m.step(sq, p))
            report.failures.push_back("diamond mismatch for " + node_name(p) +
                                      "," + node_name(q));
        } catch (const EvalError& err) {
          report.failures.push_back("evaluation error during diamond check: " +
                                    std::string(err.what()));
        }
      }
    }
  }
  return report;
}

namespace {

struct Gen {
  std::mt19937_64 rng;
  RandomCfgParams params;
  Cfg cfg;
  int next_id = 0;
  std::vector<std::string> vars;
  int budget = 0;

  uint64_t pick(uint64_t n) { return rng() % n; }
  double chance() { return (double)(rng() % 1000) / 1000.0; }
  const std::string& var() { return vars[pick(vars.size())]; }

  int fresh(Statement st) {
    cfg.nodes.emplace(next_id, std::move(st));
    budget--;
    return next_id++;
  }

  ExprPtr rhs() {
    switch (pick(5)) {
      case 0:
        return Expr::int_lit((int64_t)pick(7) - 3);
      case 1:
        return Expr::variable(var());
      case 2:
        return Expr::binary(BinOp::Add, Expr::variable(var()),
                            Expr::int_lit((int64_t)pick(5) - 2));
      case 3:
        return Expr::binary(BinOp::Sub, Expr::variable(var()),
                            Expr::int_lit((int64_t)pick(3) + 1));
      default:
        return Expr::binary(BinOp::Add, Expr::variable(var()),
                            Expr::variable(var()));
    }
  }

  ExprPtr cond() {
    BinOp ops[] = {BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq,
                   BinOp::Ne};
    return Expr::binary(ops[pick(6)], Expr::variable(var()),
                        Expr::int_lit((int64_t)pick(5) - 2));
  }

  int assign_to(int cont) {
    int id = fresh(Statement::assign(var(), rhs()));
    cfg.edges.push_back({id, cont, EdgeLabel::None});
    return id;
  }

  // Builds a single-entry region whose every exit path reaches cont.
  int region(int cont, int depth) {
    if (budget <= 1 || depth > 3) return assign_to(cont);
    bool want_loop = budget >= 3 && chance() < params.loop_bias;
    if (want_loop) return pick(2) ? while_region(cont, depth)
                                  : do_while_region(cont, depth);
    switch (pick(3)) {
      case 0:
        return assign_to(cont);
      case 1: {  // sequence
        int b = region(cont, depth + 1);
        return region(b, depth + 1);
      }
      default: {  // diamond
        if (budget < 3) return assign_to(cont);
        int t = region(cont, depth + 1);
        int f = region(cont, depth + 1);
        int c = fresh(Statement::branch(cond()));
        cfg.edges.push_back({c, t, EdgeLabel::T});
        cfg.edges.push_back({c, f, EdgeLabel::F});
        return c;
      }
    }
  }

  // Counter-decrementing loops keep random programs mostly terminating.
  int while_region(int cont, int depth) {
    std::string k = var();
    int head = fresh(Statement::branch(
        Expr::binary(BinOp::Gt, Expr::variable(k), Expr::int_lit(0))));
    cfg.edges.push_back({head, cont, EdgeLabel::F});
    int dec = fresh(Statement::assign(
        k, Expr::binary(BinOp::Sub, Expr::variable(k), Expr::int_lit(1))));
    cfg.edges.push_back({dec, head, EdgeLabel::None});
    int body = budget > 1 ? region(dec, depth + 1) : dec;
    if (body != dec) {
      cfg.edges.push_back({head, body, EdgeLabel::T});
    } else {
      cfg.edges.push_back({head, dec, EdgeLabel::T});
    }
    int init = fresh(
        Statement::assign(k, Expr::int_lit((int64_t)pick(3) + 1)));
    cfg.edges.push_back({init, head, EdgeLabel::None});
    return init;
  }

  int do_while_region(int cont, int depth) {
    std::string k = var();
    int head = fresh(Statement::branch(
        Expr::binary(BinOp::Gt, Expr::variable(k), Expr::int_lit(0))));
    cfg.edges.push_back({head, cont, EdgeLabel::F});
    int dec = fresh(Statement::assign(
        k, Expr::binary(BinOp::Sub, Expr::variable(k), Expr::int_lit(1))));
    cfg.edges.push_back({dec, head, EdgeLabel::None});
    int body = budget > 1 ? region(dec, depth + 1) : dec;
    cfg.edges.push_back({head, body == dec ? dec : body, EdgeLabel::T});
    int init = fresh(
        Statement::assign(k, Expr::int_lit((int64_t)pick(3) + 1)));
    cfg.edges.push_back({init, body == dec ? dec : body, EdgeLabel::None});
    return init;
  }
};

}  // namespace

Cfg random_cfg(uint64_t seed, const RandomCfgParams& params) {
  if (params.max_nodes < 2)
    throw std::invalid_argument("max_nodes must be >= 2");
  Gen g;
  g.rng.seed(seed * 0x9e3779b97f4a7c15ull + 1);
  g.params = params;
  int nvars = std::max(1, params.max_vars);
  for (int i = 0; i < nvars; i++) g.vars.push_back("x" + std::to_string(i));

  g.budget = 2 + (int)g.pick((uint64_t)std::max(1, params.max_nodes - 1));
  if (g.budget > params.max_nodes) g.budget = params.max_nodes;

  int ret = g.fresh(Statement::ret(g.var()));
  int entry = g.region(ret, 0);
  g.cfg.start = entry;
  g.cfg.sort_edges();

  // Bounded unstructured rewiring; every mutation must keep the graph
  // valid and keep the return node reachable from every node. Without the
  // latter a rewire can close off a region the run can never leave, and
  // inside such a trap the control-dependence structure degenerates (a
  // node may strongly postdominate the tests of its own loop).
  auto all_reach_ret = [](const Cfg& c) {
    std::map<NodeId, std::vector<NodeId>> rev;
    NodeId ret_node = c.start;
    std::set<NodeId> has_succ;
    for (const auto& e : c.edges) {
      rev[e.dst].push_back(e.src);
      has_succ.insert(e.src);
    }
    for (const auto& [id, stmt] : c.nodes)
      if (!has_succ.count(id)) ret_node = id;
    std::set<NodeId> seen{ret_node};
    std::vector<NodeId> work{ret_node};
    while (!work.empty()) {
      NodeId n = work.back();
      work.pop_back();
      for (NodeId p : rev[n])
        if (seen.insert(p).second) work.push_back(p);
    }
    return seen.size() == c.nodes.size();
  };
  size_t rewires = g.pick(3);
  for (size_t i = 0; i < rewires; i++) {
    if (g.cfg.edges.empty()) break;
    size_t ei = g.pick(g.cfg.edges.size());
    CfgEdge& e = g.cfg.edges[ei];
    NodeId old = e.dst;
    NodeId candidate = (NodeId)g.pick((uint64_t)g.next_id);
    if (candidate == g.cfg.start || candidate == e.dst) continue;
    if (params.loop_bias == 0.0 && candidate >= e.src) continue;
    e.dst = candidate;
    if (!validate_cfg(g.cfg).empty() || !all_reach_ret(g.cfg))
      e.dst = old;
    else
      g.cfg.sort_edges();
  }

  if (!validate_cfg(g.cfg).empty())
    throw std::logic_error("random_cfg produced an invalid graph");
  return g.cfg;
}

std::string FuzzReport::text() const {
  char head[160];
  std::snprintf(head, sizeof head,
                "fuzz seed=%llu count=%zu max_nodes=%d loop_bias=%g "
                "max_vars=%d\n",
                (unsigned long long)seed, count, params.max_nodes,
                params.loop_bias, params.max_vars);
  std::string out = head;
  char body[512];
  std::snprintf(
      body, sizeof body,
      "programs=%zu terminated=%zu deterministic=%zu\n"
      "condition23_violations=%zu static_lemma_failures=%zu\n"
      "guided_failures=%zu equivalence_failures=%zu\n"
      "confluence_checked=%zu confluence_failures=%zu confluence_alarms=%zu\n"
      "audit_failures=%zu stuck_states=%zu\n",
      programs, terminated, deterministic, condition_violations_23,
      static_lemma_failures, guided_failures, equivalence_failures,
      confluence_checked, confluence_failures, confluence_alarms,
      audit_failures, stuck_states);
  out += body;
  for (const auto& line : failure_lines) out += line + "\n";
  out += clean() ? "verdict=clean\n" : "verdict=failures\n";
  return out;
}

FuzzReport fuzz_campaign(uint64_t seed, size_t count,
                         const RandomCfgParams& params) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  FuzzReport report;
  report.seed = seed;
  report.count = count;
  report.params = params;
  std::mt19937_64 rng(seed ^ 0x6a09e667f3bcc909ull);

  for (size_t i = 0; i < count; i++) {
    std::string tag = "program " + std::to_string(i);
    Cfg cfg = random_cfg(seed + i, params);
    report.programs++;

    DependenceSets deps = analyze_dependences(cfg);

    // Dependence implies unreachability without back edges.
    for (const auto& d : deps.lidd) {
      ReachSets rs = reach_sets(cfg, deps.forest, d.dst);
      if (!rs.ur_noback.count(d.src)) {
        report.static_lemma_failures++;
        report.failure_lines.push_back(
            tag + ": flow source " + node_name(d.src) +
            " reachable without back edges from " + node_name(d.dst));
      }
    }
    for (const auto& d : deps.def_ord) {
      ReachSets rs = reach_sets(cfg, deps.forest, d.dst);
      if (!rs.ur_noback.count(d.src)) {
        report.static_lemma_failures++;
        report.failure_lines.push_back(
            tag + ": def-order source " + node_name(d.src) +
            " reachable without back edges from " + node_name(d.dst));
      }
    }

    PdgMachine machine(cfg);
    DpdgReport dpdg = check_dpdg(machine.analysis());
    for (const auto& v : dpdg.violations) {
      if (v.condition != 1) {
        report.condition_violations_23++;
        report.failure_lines.push_back(tag + ": condition " +
                                       std::to_string(v.condition) +
                                       " violated: " + v.witness);
      }
    }
    if (dpdg.deterministic) report.deterministic++;

    Store init;
    for (const auto& v : cfg.variables())
      init[v] = Value::integer((int64_t)(rng() % 9) - 4);

    CfgTrace trace = cfg_run(cfg, init, kDefaultCfgBound);
    if (trace.verdict != CfgTrace::Verdict::Terminated) continue;
    report.terminated++;

    GuidedResult guided = guided_run(machine, init, trace);
    if (!guided.ok) {
      report.guided_failures++;
      report.failure_lines.push_back(tag + ": " + guided.reason);
      continue;
    }
    if (guided.run.returned && trace.returned &&
        *guided.run.returned != *trace.returned) {
      report.equivalence_failures++;
      report.failure_lines.push_back(tag + ": guided return mismatch");
    }

    Exploration ex = explore_all(machine, init, 20000, 5000);
    if (ex.verdict == Exploration::Verdict::Complete) {
      report.stuck_states += ex.stuck_states.size();
      for (const Value& v : ex.return_values) {
        if (!trace.returned || v != *trace.returned) {
          report.equivalence_failures++;
          report.failure_lines.push_back(tag + ": explored return " +
                                         to_string(v) + " mismatch");
        }
      }
      AuditReport audit =
          lemma_audit(machine, ex.states, dpdg.deterministic);
      if (!audit.failures.empty()) {
        report.audit_failures += audit.failures.size();
        for (const auto& f : audit.failures)
          report.failure_lines.push_back(tag + ": " + f);
      }
      if (dpdg.deterministic) {
        report.confluence_checked++;
        ConfluenceResult conf = check_confluence(ex, dpdg);
        if (!conf.pass) {
          report.confluence_failures++;
          if (conf.alarm) report.confluence_alarms++;
          report.failure_lines.push_back(tag + ": confluence: " +
                                         conf.detail);
        }
      }
    } else {
      for (uint64_t s = 0; s < 8; s++) {
        PdgRun run =
            machine.run(init, Strategy::SeededRandom, s, kDefaultCfgBound);
        if (run.verdict == PdgRun::Verdict::Quiescent && run.returned &&
            trace.returned && *run.returned != *trace.returned) {
          report.equivalence_failures++;
          report.failure_lines.push_back(tag + ": sampled return mismatch");
        }
      }
    }
  }
  return report;
}

}  // namespace pdgsem
