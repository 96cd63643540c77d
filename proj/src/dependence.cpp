#include "pdgsem/dependence.hpp"

#include <algorithm>
#include <deque>

namespace pdgsem {

std::vector<NodeId> Digraph::successors(NodeId n) const {
  std::vector<NodeId> out;
  for (const auto& [u, v] : edges)
    if (u == n) out.push_back(v);
  return out;
}

std::vector<NodeId> Digraph::predecessors(NodeId n) const {
  std::vector<NodeId> out;
  for (const auto& [u, v] : edges)
    if (v == n) out.push_back(u);
  return out;
}

Digraph digraph_of(const Cfg& cfg) {
  Digraph g;
  for (const auto& [id, stmt] : cfg.nodes) g.nodes.insert(id);
  for (const auto& e : cfg.edges) g.edges.insert({e.src, e.dst});
  return g;
}

Digraph digraph_of(const AugmentedCfg& a) {
  Digraph g;
  g.nodes.insert(a.nodes.begin(), a.nodes.end());
  for (const auto& e : a.edges) g.edges.insert({e.src, e.dst});
  return g;
}

PostDomRelation::PostDomRelation(const Digraph& g) {
  std::map<NodeId, std::vector<NodeId>> succ;
  for (NodeId n : g.nodes) succ[n] = g.successors(n);

  for (NodeId t : g.nodes) {
    std::set<NodeId>& a = dominated_[t];
    a.insert(t);
    bool changed = true;
    while (changed) {
      changed = false;
      for (NodeId s : g.nodes) {
        if (a.count(s)) continue;
        const auto& ss = succ[s];
        if (ss.empty()) continue;
        bool all = true;
        for (NodeId u : ss)
          if (!a.count(u)) {
            all = false;
            break;
          }
        if (all) {
          a.insert(s);
          changed = true;
        }
      }
    }
  }
}

bool PostDomRelation::pdom(NodeId t, NodeId s) const {
  auto it = dominated_.find(t);
  return it != dominated_.end() && it->second.count(s);
}

bool PostDomRelation::strictly_pdom(NodeId t, NodeId s) const {
  return t != s && pdom(t, s);
}

const std::set<NodeId>& PostDomRelation::dominated(NodeId t) const {
  static const std::set<NodeId> empty;
  auto it = dominated_.find(t);
  return it == dominated_.end() ? empty : it->second;
}

PostDomRelation strong_postdom(const AugmentedCfg& g) {
  return PostDomRelation(digraph_of(g));
}

std::vector<CdEdge> control_dependence(const AugmentedCfg& g,
                                       const PostDomRelation& pd) {
  std::vector<CdEdge> out;
  std::vector<NodeId> sources{kEntryNode};
  for (const auto& [id, stmt] : g.cfg.nodes)
    if (stmt.kind == Statement::Kind::If) sources.push_back(id);

  for (NodeId s : sources) {
    for (EdgeLabel q : {EdgeLabel::T, EdgeLabel::F}) {
      auto u = g.successor(s, q);
      if (!u) continue;
      for (const auto& [t, stmt] : g.cfg.nodes) {
        if (pd.pdom(t, *u) && !pd.strictly_pdom(t, s))
          out.push_back({s, t, q});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CdEdge> control_dependence(const AugmentedCfg& g) {
  return control_dependence(g, strong_postdom(g));
}

bool LoopSet::same_loop(NodeId s, NodeId t) const {
  for (const auto& l : loops)
    if (l.nodes.count(s) && l.nodes.count(t)) return true;
  return false;
}

std::set<std::pair<NodeId, NodeId>> LoopSet::be(NodeId s, NodeId t) const {
  std::set<std::pair<NodeId, NodeId>> out;
  for (const auto& l : loops)
    if (l.nodes.count(s) && l.nodes.count(t))
      out.insert(l.back_edges.begin(), l.back_edges.end());
  return out;
}

std::set<std::pair<NodeId, NodeId>> LoopSet::all_back_edges() const {
  std::set<std::pair<NodeId, NodeId>> out;
  for (const auto& l : loops) out.insert(l.back_edges.begin(), l.back_edges.end());
  return out;
}

namespace {

bool strongly_connected(const Digraph& g, const std::set<NodeId>& sub) {
  if (sub.empty()) return false;
  NodeId seed = *sub.begin();
  auto sweep = [&](bool forward) {
    std::set<NodeId> seen{seed};
    std::vector<NodeId> work{seed};
    while (!work.empty()) {
      NodeId n = work.back();
      work.pop_back();
      for (const auto& [u, v] : g.edges) {
        NodeId from = forward ? u : v;
        NodeId to = forward ? v : u;
        if (from == n && sub.count(to) && seen.insert(to).second)
          work.push_back(to);
      }
    }
    return seen.size() == sub.size();
  };
  return sweep(true) && sweep(false);
}

Loop make_loop(const Digraph& g, const std::set<NodeId>& sub) {
  Loop loop;
  loop.nodes = sub;
  for (const auto& [u, v] : g.edges) {
    if (!sub.count(u) || !sub.count(v)) continue;
    for (NodeId p : g.predecessors(v)) {
      if (!sub.count(p)) {
        loop.back_edges.insert({u, v});
        break;
      }
    }
  }
  return loop;
}

bool has_induced_edge(const Digraph& g, const std::set<NodeId>& sub) {
  for (const auto& [u, v] : g.edges)
    if (sub.count(u) && sub.count(v)) return true;
  return false;
}

// Tarjan-style SCC decomposition of the subgraph induced by `sub`.
std::vector<std::set<NodeId>> sccs_of(const Digraph& g,
                                      const std::set<NodeId>& sub) {
  std::map<NodeId, int> index, low;
  std::map<NodeId, bool> on_stack;
  std::vector<NodeId> stack;
  std::vector<std::set<NodeId>> out;
  int counter = 0;

  struct Frame {
    NodeId n;
    std::vector<NodeId> succ;
    size_t next = 0;
  };

  for (NodeId root : sub) {
    if (index.count(root)) continue;
    std::vector<Frame> frames;
    auto push_node = [&](NodeId n) {
      index[n] = low[n] = counter++;
      stack.push_back(n);
      on_stack[n] = true;
      Frame f{n, {}, 0};
      for (NodeId v : g.successors(n))
        if (sub.count(v)) f.succ.push_back(v);
      frames.push_back(std::move(f));
    };
    push_node(root);
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.next < f.succ.size()) {
        NodeId v = f.succ[f.next++];
        if (!index.count(v)) {
          push_node(v);
        } else if (on_stack[v]) {
          low[f.n] = std::min(low[f.n], index[v]);
        }
      } else {
        NodeId n = f.n;
        if (low[n] == index[n]) {
          std::set<NodeId> comp;
          for (;;) {
            NodeId m = stack.back();
            stack.pop_back();
            on_stack[m] = false;
            comp.insert(m);
            if (m == n) break;
          }
          out.push_back(std::move(comp));
        }
        frames.pop_back();
        if (!frames.empty())
          low[frames.back().n] = std::min(low[frames.back().n], low[n]);
      }
    }
  }
  return out;
}

void collect_scc_subsets(const Digraph& g, const std::set<NodeId>& sub,
                         std::set<std::set<NodeId>>& found,
                         std::set<std::set<NodeId>>& visited) {
  if (!visited.insert(sub).second) return;
  for (const auto& comp : sccs_of(g, sub)) {
    if (!has_induced_edge(g, comp)) continue;
    found.insert(comp);
    for (NodeId v : comp) {
      std::set<NodeId> smaller = comp;
      smaller.erase(v);
      if (!smaller.empty()) collect_scc_subsets(g, smaller, found, visited);
    }
  }
}

LoopSet finish(const Digraph& g, const std::set<std::set<NodeId>>& found) {
  LoopSet out;
  for (const auto& sub : found) out.loops.push_back(make_loop(g, sub));
  std::sort(out.loops.begin(), out.loops.end());
  return out;
}

}  // namespace

LoopSet enumerate_loops_exhaustive(const Digraph& g) {
  if ((int)g.nodes.size() > kExhaustiveLoopLimit)
    throw std::invalid_argument("graph too large for exhaustive loop search");
  std::vector<NodeId> order(g.nodes.begin(), g.nodes.end());
  std::set<std::set<NodeId>> found;
  for (uint32_t mask = 1; mask < (1u << order.size()); mask++) {
    std::set<NodeId> sub;
    for (size_t i = 0; i < order.size(); i++)
      if (mask & (1u << i)) sub.insert(order[i]);
    if (has_induced_edge(g, sub) && strongly_connected(g, sub))
      found.insert(std::move(sub));
  }
  return finish(g, found);
}

LoopSet enumerate_loops_scc(const Digraph& g) {
  std::set<std::set<NodeId>> found, visited;
  collect_scc_subsets(g, g.nodes, found, visited);
  return finish(g, found);
}

LoopSet enumerate_loops(const Digraph& g) {
  if ((int)g.nodes.size() <= kExhaustiveLoopLimit)
    return enumerate_loops_exhaustive(g);
  return enumerate_loops_scc(g);
}

namespace {

// `preds` is the predecessor map of the full graph (including the virtual
// root edge); the entry test always consults it, while `g` shrinks as back
// edges are peeled off level by level.
void forest_collect(const std::map<NodeId, std::set<NodeId>>& preds,
                    const Digraph& g, std::vector<Loop>& out) {
  for (const auto& comp : sccs_of(g, g.nodes)) {
    if (!has_induced_edge(g, comp)) continue;
    Loop loop;
    loop.nodes = comp;
    for (const auto& e : g.edges) {
      if (!comp.count(e.first) || !comp.count(e.second)) continue;
      auto it = preds.find(e.second);
      if (it == preds.end()) continue;
      for (NodeId p : it->second) {
        if (!comp.count(p)) {
          loop.back_edges.insert(e);
          break;
        }
      }
    }
    if (loop.back_edges.empty())
      throw std::logic_error("strongly connected component without an entry");
    Digraph inner;
    inner.nodes = comp;
    for (const auto& e : g.edges)
      if (comp.count(e.first) && comp.count(e.second) &&
          !loop.back_edges.count(e))
        inner.edges.insert(e);
    out.push_back(std::move(loop));
    forest_collect(preds, inner, out);
  }
}

}  // namespace

LoopSet loop_forest(const Digraph& g_in, NodeId root) {
  Digraph g = g_in;
  g.nodes.insert(kEntryNode);
  g.edges.insert({kEntryNode, root});
  std::map<NodeId, std::set<NodeId>> preds;
  for (const auto& [u, v] : g.edges) preds[v].insert(u);
  LoopSet out;
  forest_collect(preds, g, out.loops);
  std::sort(out.loops.begin(), out.loops.end());
  return out;
}

LoopSet loop_forest(const Cfg& cfg) {
  return loop_forest(digraph_of(cfg), cfg.start);
}

bool reaching_path_exists(
    const Cfg& cfg, NodeId s, NodeId t, const std::string& w,
    const std::set<std::pair<NodeId, NodeId>>& forbidden) {
  auto defines_w = [&](NodeId n) {
    auto d = cfg.nodes.at(n).def();
    return d && *d == w;
  };
  std::set<NodeId> seen;
  std::deque<NodeId> work;
  for (const auto& e : cfg.edges) {
    if (e.src == s && !forbidden.count({e.src, e.dst}) &&
        seen.insert(e.dst).second)
      work.push_back(e.dst);
  }
  while (!work.empty()) {
    NodeId n = work.front();
    work.pop_front();
    if (n == t) return true;
    if (defines_w(n)) continue;  // interior node must not define w
    for (const auto& e : cfg.edges) {
      if (e.src == n && !forbidden.count({e.src, e.dst}) &&
          seen.insert(e.dst).second)
        work.push_back(e.dst);
    }
  }
  return false;
}

DataDeps data_dependence(const Cfg& cfg, const LoopSet& loops) {
  DataDeps out;
  for (const auto& [s, sstmt] : cfg.nodes) {
    auto def = sstmt.def();
    if (!def) continue;
    const std::string& w = *def;
    for (const auto& [t, tstmt] : cfg.nodes) {
      if (!tstmt.uses().count(w)) continue;
      if (!reaching_path_exists(cfg, s, t, w, {})) continue;
      bool lidd;
      if (!loops.same_loop(s, t)) {
        lidd = true;
      } else {
        lidd = reaching_path_exists(cfg, s, t, w, loops.be(s, t));
      }
      (lidd ? out.lidd : out.lcdd).push_back({s, t, w});
    }
  }
  std::sort(out.lidd.begin(), out.lidd.end());
  std::sort(out.lcdd.begin(), out.lcdd.end());
  return out;
}

namespace {

bool reachable(const Cfg& cfg, NodeId s, NodeId t,
               const std::set<std::pair<NodeId, NodeId>>& forbidden) {
  std::set<NodeId> seen;
  std::deque<NodeId> work;
  for (const auto& e : cfg.edges)
    if (e.src == s && !forbidden.count({e.src, e.dst}) &&
        seen.insert(e.dst).second)
      work.push_back(e.dst);
  while (!work.empty()) {
    NodeId n = work.front();
    work.pop_front();
    if (n == t) return true;
    for (const auto& e : cfg.edges)
      if (e.src == n && !forbidden.count({e.src, e.dst}) &&
          seen.insert(e.dst).second)
        work.push_back(e.dst);
  }
  return false;
}

}  // namespace

std::vector<DefOrdDep> def_order_dependence(const Cfg& cfg,
                                            const std::vector<DataDep>& flow,
                                            const LoopSet& loops) {
  std::set<DefOrdDep> out;
  for (const auto& [s, sstmt] : cfg.nodes) {
    auto sdef = sstmt.def();
    if (!sdef) continue;
    for (const auto& [t, tstmt] : cfg.nodes) {
      if (s == t) continue;
      if (tstmt.def() != sdef) continue;
      const std::string& w = *sdef;

      std::optional<NodeId> witness;
      for (const auto& d : flow) {
        if (d.src != s || d.var != w) continue;
        for (const auto& d2 : flow)
          if (d2.src == t && d2.var == w && d2.dst == d.dst) {
            witness = d.dst;
            break;
          }
        if (witness) break;
      }
      if (!witness) continue;

      bool same = loops.same_loop(s, t);
      if (!same) {
        if (reachable(cfg, s, t, {})) out.insert({s, t, w, *witness});
      } else {
        auto be = loops.be(s, t);
        if (reachable(cfg, s, t, be)) {
          out.insert({s, t, w, *witness});
        } else if (reachable(cfg, s, t, {}) && reachable(cfg, t, s, {}) &&
                   !reachable(cfg, t, s, be)) {
          // Mutual reachability only through back edges: both directions.
          out.insert({s, t, w, *witness});
          out.insert({t, s, w, *witness});
        }
      }
    }
  }
  return {out.begin(), out.end()};
}

ReachSets reach_sets(const Cfg& cfg, const LoopSet& loops, NodeId n) {
  if (!cfg.nodes.count(n))
    throw std::invalid_argument("reach_sets: unknown node " + node_name(n));
  ReachSets out;
  auto sweep = [&](const std::set<std::pair<NodeId, NodeId>>& forbidden) {
    std::set<NodeId> seen{n};
    std::vector<NodeId> work{n};
    while (!work.empty()) {
      NodeId u = work.back();
      work.pop_back();
      for (const auto& e : cfg.edges)
        if (e.src == u && !forbidden.count({e.src, e.dst}) &&
            seen.insert(e.dst).second)
          work.push_back(e.dst);
    }
    return seen;
  };
  out.r = sweep({});
  out.r_noback = sweep(loops.all_back_edges());
  for (const auto& [id, stmt] : cfg.nodes) {
    if (!out.r.count(id)) out.ur.insert(id);
    if (!out.r_noback.count(id)) out.ur_noback.insert(id);
  }
  return out;
}

DependenceSets analyze_dependences(const Cfg& cfg) {
  DependenceSets out;
  AugmentedCfg aug = augment_cfg(cfg);
  out.cd = control_dependence(aug);
  out.loops = enumerate_loops(digraph_of(cfg));
  out.forest = loop_forest(cfg);
  auto dd = data_dependence(cfg, out.forest);
  out.lidd = std::move(dd.lidd);
  out.lcdd = std::move(dd.lcdd);
  std::vector<DataDep> flow = out.lidd;
  flow.insert(flow.end(), out.lcdd.begin(), out.lcdd.end());
  out.def_ord = def_order_dependence(cfg, flow, out.forest);
  return out;
}

}  // namespace pdgsem
