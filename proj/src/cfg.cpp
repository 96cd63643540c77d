#include "pdgsem/cfg.hpp"

#include <algorithm>

namespace pdgsem {

std::string node_name(NodeId n) {
  if (n == kEntryNode) return "entry";
  if (n == kExitNode) return "exit";
  return std::to_string(n);
}

Statement Statement::assign(std::string target, ExprPtr rhs) {
  Statement s;
  s.kind = Kind::Assign;
  s.var = std::move(target);
  s.expr = std::move(rhs);
  return s;
}

Statement Statement::branch(ExprPtr cond) {
  Statement s;
  s.kind = Kind::If;
  s.expr = std::move(cond);
  return s;
}

Statement Statement::ret(std::string var) {
  Statement s;
  s.kind = Kind::Ret;
  s.var = std::move(var);
  return s;
}

std::set<std::string> Statement::uses() const {
  switch (kind) {
    case Kind::Assign:
    case Kind::If:
      return vars(*expr);
    case Kind::Ret:
      return {var};
  }
  return {};
}

std::optional<std::string> Statement::def() const {
  if (kind == Kind::Assign) return var;
  return std::nullopt;
}

std::string to_string(const Statement& s) {
  switch (s.kind) {
    case Statement::Kind::Assign:
      return s.var + " := " + to_string(*s.expr);
    case Statement::Kind::If:
      return "if " + to_string(*s.expr);
    case Statement::Kind::Ret:
      return "ret " + s.var;
  }
  return "?";
}

std::vector<NodeId> Cfg::successors(NodeId n) const {
  std::vector<NodeId> out;
  for (const auto& e : edges)
    if (e.src == n) out.push_back(e.dst);
  return out;
}

std::optional<NodeId> Cfg::successor(NodeId n, EdgeLabel l) const {
  for (const auto& e : edges)
    if (e.src == n && e.label == l) return e.dst;
  return std::nullopt;
}

std::vector<NodeId> Cfg::predecessors(NodeId n) const {
  std::vector<NodeId> out;
  for (const auto& e : edges)
    if (e.dst == n) out.push_back(e.src);
  return out;
}

bool Cfg::has_edge(NodeId src, NodeId dst) const {
  for (const auto& e : edges)
    if (e.src == src && e.dst == dst) return true;
  return false;
}

NodeId Cfg::ret_node() const {
  for (const auto& [id, stmt] : nodes)
    if (successors(id).empty()) return id;
  throw std::logic_error("cfg has no terminal node");
}

std::set<std::string> Cfg::variables() const {
  std::set<std::string> out;
  for (const auto& [id, stmt] : nodes) {
    auto u = stmt.uses();
    out.insert(u.begin(), u.end());
    if (auto d = stmt.def()) out.insert(*d);
  }
  return out;
}

void Cfg::sort_edges() {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

std::vector<NodeId> AugmentedCfg::successors(NodeId n) const {
  std::vector<NodeId> out;
  for (const auto& e : edges)
    if (e.src == n) out.push_back(e.dst);
  return out;
}

std::optional<NodeId> AugmentedCfg::successor(NodeId n, EdgeLabel l) const {
  for (const auto& e : edges)
    if (e.src == n && e.label == l) return e.dst;
  return std::nullopt;
}

AugmentedCfg augment_cfg(const Cfg& cfg) {
  AugmentedCfg g;
  g.cfg = cfg;
  for (const auto& [id, stmt] : cfg.nodes) g.nodes.push_back(id);
  g.nodes.push_back(kEntryNode);
  g.nodes.push_back(kExitNode);
  std::sort(g.nodes.begin(), g.nodes.end());
  g.edges = cfg.edges;
  g.edges.push_back({kEntryNode, cfg.start, EdgeLabel::T});
  g.edges.push_back({kEntryNode, kExitNode, EdgeLabel::F});
  g.edges.push_back({cfg.ret_node(), kExitNode, EdgeLabel::None});
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

std::vector<std::string> validate_cfg(const Cfg& cfg) {
  std::vector<std::string> out;
  if (cfg.nodes.empty()) {
    out.push_back("graph has no nodes");
    return out;
  }
  if (!cfg.nodes.count(cfg.start)) {
    out.push_back("start node " + node_name(cfg.start) + " does not exist");
    return out;
  }

  for (const auto& e : cfg.edges) {
    if (!cfg.nodes.count(e.src))
      out.push_back("edge references unknown node " + node_name(e.src));
    if (!cfg.nodes.count(e.dst))
      out.push_back("edge references unknown node " + node_name(e.dst));
  }
  if (!out.empty()) return out;

  if (!cfg.predecessors(cfg.start).empty())
    out.push_back("start node " + node_name(cfg.start) +
                  " has an incoming edge");

  int terminal_count = 0;
  for (const auto& [id, stmt] : cfg.nodes) {
    std::vector<const CfgEdge*> succ;
    for (const auto& e : cfg.edges)
      if (e.src == id) succ.push_back(&e);

    switch (stmt.kind) {
      case Statement::Kind::Assign:
        if (succ.size() != 1)
          out.push_back("assign node " + node_name(id) + " has " +
                        std::to_string(succ.size()) +
                        " successors (expected 1)");
        else if (succ[0]->label != EdgeLabel::None)
          out.push_back("assign node " + node_name(id) +
                        " has a labeled outgoing edge");
        break;
      case Statement::Kind::If: {
        bool has_t = false, has_f = false, bad = false;
        for (const auto* e : succ) {
          if (e->label == EdgeLabel::T && !has_t)
            has_t = true;
          else if (e->label == EdgeLabel::F && !has_f)
            has_f = true;
          else
            bad = true;
        }
        if (!has_t) out.push_back("if-node " + node_name(id) + " lacks T successor");
        if (!has_f) out.push_back("if-node " + node_name(id) + " lacks F successor");
        if (bad)
          out.push_back("if-node " + node_name(id) +
                        " has duplicate or unlabeled successors");
        break;
      }
      case Statement::Kind::Ret:
        if (!succ.empty())
          out.push_back("ret node " + node_name(id) + " has a successor");
        terminal_count++;
        break;
    }
    if (stmt.kind != Statement::Kind::Ret && succ.empty())
      out.push_back("node " + node_name(id) +
                    " has no successor but is not a ret statement");
  }
  if (terminal_count != 1)
    out.push_back("expected exactly one ret node, found " +
                  std::to_string(terminal_count));

  // Reachability from start.
  std::set<NodeId> seen{cfg.start};
  std::vector<NodeId> work{cfg.start};
  while (!work.empty()) {
    NodeId n = work.back();
    work.pop_back();
    for (NodeId s : cfg.successors(n))
      if (seen.insert(s).second) work.push_back(s);
  }
  for (const auto& [id, stmt] : cfg.nodes)
    if (!seen.count(id))
      out.push_back("node " + node_name(id) + " is unreachable from start");

  return out;
}

void require_total_store(const Cfg& cfg, const Store& s) {
  for (const auto& v : cfg.variables()) {
    if (!s.count(v))
      throw std::invalid_argument("initial store does not bind variable '" +
                                  v + "'");
  }
}

std::pair<std::optional<NodeId>, Store> cfg_step(const Cfg& cfg, NodeId n,
                                                 const Store& store) {
  auto it = cfg.nodes.find(n);
  if (it == cfg.nodes.end())
    throw std::invalid_argument("cfg_step: unknown node " + node_name(n));
  const Statement& stmt = it->second;
  auto env = [&](const std::string& name) -> Value {
    auto v = store.find(name);
    if (v == store.end())
      throw EvalError("unbound variable '" + name + "'");
    return v->second;
  };
  switch (stmt.kind) {
    case Statement::Kind::Assign: {
      Value v = eval_expr(*stmt.expr, env);
      Store next = store;
      next[stmt.var] = v;
      return {cfg.successors(n).at(0), std::move(next)};
    }
    case Statement::Kind::If: {
      Value c = eval_expr(*stmt.expr, env);
      if (!c.is_truth())
        throw EvalError("non-truth condition at node " + node_name(n));
      auto succ = cfg.successor(n, c.truth_value() ? EdgeLabel::T : EdgeLabel::F);
      if (!succ)
        throw std::logic_error("if node " + node_name(n) + " missing successor");
      return {*succ, store};
    }
    case Statement::Kind::Ret:
      return {std::nullopt, store};
  }
  throw std::logic_error("unreachable");
}

CfgTrace cfg_run(const Cfg& cfg, const Store& init, int bound) {
  if (bound < 1) throw std::invalid_argument("bound must be >= 1");
  require_total_store(cfg, init);

  CfgTrace trace;
  Store store = init;
  NodeId n = cfg.start;
  for (int i = 0; i < bound; i++) {
    trace.steps.push_back({n, store});
    const Statement& stmt = cfg.nodes.at(n);
    try {
      auto [next, updated] = cfg_step(cfg, n, store);
      store = std::move(updated);
      if (!next) {
        trace.final_store = store;
        trace.verdict = CfgTrace::Verdict::Terminated;
        trace.returned = store.at(stmt.var);
        return trace;
      }
      n = *next;
    } catch (const EvalError& err) {
      trace.final_store = store;
      trace.verdict = CfgTrace::Verdict::RuntimeError;
      trace.error = err.what();
      return trace;
    }
  }
  trace.final_store = store;
  trace.verdict = CfgTrace::Verdict::BoundExceeded;
  return trace;
}

}  // namespace pdgsem
