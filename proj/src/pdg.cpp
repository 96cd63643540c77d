#include "pdgsem/pdg.hpp"

#include <algorithm>

namespace pdgsem {

const char* kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::C:
      return "C";
    case EdgeKind::F:
      return "F";
    case EdgeKind::L:
      return "L";
    case EdgeKind::D:
      return "D";
  }
  return "?";
}

std::string to_string(const EdgeKey& e) {
  std::string out = std::string(kind_name(e.kind)) + " " + node_name(e.src) +
                    " " + node_name(e.dst);
  if (!e.tag.empty()) out += " " + e.tag;
  return out;
}

EdgeKey ct(NodeId src, NodeId dst) { return {EdgeKind::C, src, dst, "T"}; }
EdgeKey cf(NodeId src, NodeId dst) { return {EdgeKind::C, src, dst, "F"}; }
EdgeKey fd(NodeId src, NodeId dst, std::string var) {
  return {EdgeKind::F, src, dst, std::move(var)};
}
EdgeKey ld(NodeId src, NodeId dst, std::string var) {
  return {EdgeKind::L, src, dst, std::move(var)};
}
EdgeKey dd(NodeId src, NodeId dst) { return {EdgeKind::D, src, dst, ""}; }

std::vector<EdgeKey> Pdg::edges_of_kind(EdgeKind k) const {
  std::vector<EdgeKey> out;
  for (const auto& e : edges)
    if (e.kind == k) out.push_back(e);
  return out;
}

std::vector<EdgeKey> Pdg::out_edges(NodeId n, EdgeKind k) const {
  std::vector<EdgeKey> out;
  for (const auto& e : edges)
    if (e.kind == k && e.src == n) out.push_back(e);
  return out;
}

std::vector<EdgeKey> Pdg::in_edges(NodeId n, EdgeKind k) const {
  std::vector<EdgeKey> out;
  for (const auto& e : edges)
    if (e.kind == k && e.dst == n) out.push_back(e);
  return out;
}

Pdg build_pdg(const Cfg& cfg) {
  DependenceSets deps = analyze_dependences(cfg);
  Pdg pdg;
  pdg.statements = cfg.nodes;
  pdg.nodes.push_back(kEntryNode);
  for (const auto& [id, stmt] : cfg.nodes) pdg.nodes.push_back(id);
  std::sort(pdg.nodes.begin(), pdg.nodes.end());

  for (const auto& c : deps.cd)
    pdg.edges.push_back(c.label == EdgeLabel::T ? ct(c.src, c.dst)
                                                : cf(c.src, c.dst));
  for (const auto& d : deps.lidd) pdg.edges.push_back(fd(d.src, d.dst, d.var));
  for (const auto& d : deps.lcdd) pdg.edges.push_back(ld(d.src, d.dst, d.var));
  std::set<std::pair<NodeId, NodeId>> dpairs;
  for (const auto& d : deps.def_ord) dpairs.insert({d.src, d.dst});
  for (const auto& [s, t] : dpairs) pdg.edges.push_back(dd(s, t));

  std::sort(pdg.edges.begin(), pdg.edges.end());
  pdg.edges.erase(std::unique(pdg.edges.begin(), pdg.edges.end()),
                  pdg.edges.end());
  return pdg;
}

Pdg pdg_from_parts(std::map<NodeId, Statement> statements,
                   std::vector<EdgeKey> edges) {
  Pdg pdg;
  pdg.statements = std::move(statements);
  pdg.nodes.push_back(kEntryNode);
  for (const auto& [id, stmt] : pdg.statements) pdg.nodes.push_back(id);
  std::sort(pdg.nodes.begin(), pdg.nodes.end());
  pdg.edges = std::move(edges);
  std::sort(pdg.edges.begin(), pdg.edges.end());
  pdg.edges.erase(std::unique(pdg.edges.begin(), pdg.edges.end()),
                  pdg.edges.end());
  return pdg;
}

std::vector<std::string> validate_pdg(const Pdg& pdg) {
  std::vector<std::string> out;
  std::set<NodeId> nodes(pdg.nodes.begin(), pdg.nodes.end());
  if (!nodes.count(kEntryNode)) out.push_back("entry node missing");

  auto stmt_kind = [&](NodeId n) -> std::optional<Statement::Kind> {
    auto it = pdg.statements.find(n);
    if (it == pdg.statements.end()) return std::nullopt;
    return it->second.kind;
  };

  for (const auto& e : pdg.edges) {
    std::string name = to_string(e);
    if (!nodes.count(e.src) || !nodes.count(e.dst)) {
      out.push_back("edge " + name + " references an unknown node");
      continue;
    }
    if (e.kind == EdgeKind::C && e.tag != "T" && e.tag != "F")
      out.push_back("edge " + name + " has a non-T/F label");
    if ((e.kind == EdgeKind::F || e.kind == EdgeKind::L) && e.tag.empty())
      out.push_back("edge " + name + " lacks a variable");
    if (e.kind == EdgeKind::D && !e.tag.empty())
      out.push_back("edge " + name + " carries an unexpected tag");

    auto sk = stmt_kind(e.src);
    if (e.src == kEntryNode) {
      if (e.kind != EdgeKind::C)
        out.push_back("entry has an outgoing non-C edge " + name);
    } else if (sk) {
      switch (*sk) {
        case Statement::Kind::Assign:
          if (e.kind == EdgeKind::C)
            out.push_back("assign node " + node_name(e.src) +
                          " has outgoing C edge " + name);
          break;
        case Statement::Kind::If:
          if (e.kind != EdgeKind::C)
            out.push_back("if-node " + node_name(e.src) +
                          " has outgoing non-C edge " + name);
          break;
        case Statement::Kind::Ret:
          out.push_back("ret node " + node_name(e.src) +
                        " has outgoing edge " + name);
          break;
      }
    }

    if (e.kind == EdgeKind::F || e.kind == EdgeKind::L) {
      auto src_it = pdg.statements.find(e.src);
      auto dst_it = pdg.statements.find(e.dst);
      if (src_it == pdg.statements.end() ||
          src_it->second.def() != std::optional<std::string>(e.tag))
        out.push_back("edge " + name + ": source does not define " + e.tag);
      if (dst_it == pdg.statements.end() || !dst_it->second.uses().count(e.tag))
        out.push_back("edge " + name + ": destination does not use " + e.tag);
    }

    if (e.kind == EdgeKind::D) {
      auto src_it = pdg.statements.find(e.src);
      auto dst_it = pdg.statements.find(e.dst);
      bool ok = false;
      if (src_it != pdg.statements.end() && dst_it != pdg.statements.end()) {
        auto sd = src_it->second.def();
        auto td = dst_it->second.def();
        if (sd && td && *sd == *td) {
          for (const auto& f1 : pdg.out_edges(e.src, EdgeKind::F)) {
            if (f1.tag != *sd) continue;
            for (const auto& f2 : pdg.out_edges(e.dst, EdgeKind::F))
              if (f2.tag == *sd && f2.dst == f1.dst) ok = true;
          }
        }
      }
      if (!ok)
        out.push_back("edge " + name +
                      ": endpoints lack a common definition and flow target");
    }
  }

  for (NodeId n : pdg.nodes) {
    if (n == kEntryNode) continue;
    if (pdg.in_edges(n, EdgeKind::C).empty())
      out.push_back("node " + node_name(n) + " has no incoming C edge");
  }
  return out;
}

const char* mode_name(SubgraphMode m) {
  switch (m) {
    case SubgraphMode::G:
      return "G";
    case SubgraphMode::GT:
      return "GT";
    case SubgraphMode::GF:
      return "GF";
    case SubgraphMode::GS:
      return "GS";
    case SubgraphMode::GTS:
      return "GTS";
    case SubgraphMode::GFS:
      return "GFS";
  }
  return "?";
}

std::optional<SubgraphMode> parse_mode(const std::string& s) {
  if (s == "G") return SubgraphMode::G;
  if (s == "GT") return SubgraphMode::GT;
  if (s == "GF") return SubgraphMode::GF;
  if (s == "GS") return SubgraphMode::GS;
  if (s == "GTS") return SubgraphMode::GTS;
  if (s == "GFS") return SubgraphMode::GFS;
  return std::nullopt;
}

Digraph cdg_of(const Pdg& pdg) {
  Digraph g;
  g.nodes.insert(pdg.nodes.begin(), pdg.nodes.end());
  for (const auto& e : pdg.edges)
    if (e.kind == EdgeKind::C) g.edges.insert({e.src, e.dst});
  return g;
}

std::set<EdgeKey> looping_edges(const Pdg& pdg, const LoopSet& cdg_loops) {
  std::set<EdgeKey> out;
  auto c_edges = pdg.edges_of_kind(EdgeKind::C);
  for (const auto& loop : cdg_loops.loops) {
    for (const auto& [p, q] : loop.back_edges) {
      // Each C edge realizing the back edge contributes its own label.
      for (const auto& be : c_edges) {
        if (be.src != p || be.dst != q) continue;
        for (const auto& e : c_edges) {
          if (e.src != p || e.tag != be.tag) continue;
          bool other_pred = false;
          for (const auto& in : c_edges)
            if (in.dst == e.dst && in.src != p) other_pred = true;
          if (other_pred) out.insert(e);
        }
      }
    }
  }
  return out;
}

std::vector<std::set<NodeId>> iteration_statements(const Cfg& cfg,
                                                   const LoopSet& loops) {
  std::vector<std::set<NodeId>> out;
  for (const auto& loop : loops.loops) {
    std::set<NodeId> its;
    for (NodeId n : loop.nodes) {
      if (cfg.nodes.at(n).kind != Statement::Kind::If) continue;
      bool inside = false, outside = false;
      for (NodeId s : cfg.successors(n))
        (loop.nodes.count(s) ? inside : outside) = true;
      if (inside && outside) its.insert(n);
    }
    if (its.empty())
      throw std::logic_error("loop without an iteration statement");
    out.push_back(std::move(its));
  }
  return out;
}

PdgAnalysis::PdgAnalysis(Pdg pdg, size_t mca_pair_limit)
    : pdg_(std::move(pdg)), mca_pair_limit_(mca_pair_limit) {
  cdg_ = cdg_of(pdg_);
  cdg_loops_ = enumerate_loops(cdg_);
  looping_ = looping_edges(pdg_, cdg_loops_);
  for (const auto& e : pdg_.edges)
    if (e.kind == EdgeKind::C && !looping_.count(e)) c_hat_.push_back(e);

  // Cyclic strongly connected components of the CDG: a node's component is
  // recorded only when the component has an internal C edge.
  for (NodeId n : cdg_.nodes) {
    // Component = nodes mutually reachable with n.
    std::set<NodeId> fwd{n}, bwd{n};
    std::vector<NodeId> work{n};
    while (!work.empty()) {
      NodeId u = work.back();
      work.pop_back();
      for (const auto& [a, b] : cdg_.edges)
        if (a == u && fwd.insert(b).second) work.push_back(b);
    }
    work = {n};
    while (!work.empty()) {
      NodeId u = work.back();
      work.pop_back();
      for (const auto& [a, b] : cdg_.edges)
        if (b == u && bwd.insert(a).second) work.push_back(a);
    }
    std::set<NodeId> comp;
    std::set_intersection(fwd.begin(), fwd.end(), bwd.begin(), bwd.end(),
                          std::inserter(comp, comp.begin()));
    bool cyclic = false;
    for (const auto& [a, b] : cdg_.edges)
      if (comp.count(a) && comp.count(b)) cyclic = true;
    if (cyclic) cyclic_scc_[n] = std::move(comp);
  }
}

std::set<NodeId> PdgAnalysis::subgraph(NodeId p, SubgraphMode mode) const {
  bool starred = mode == SubgraphMode::GS || mode == SubgraphMode::GTS ||
                 mode == SubgraphMode::GFS;
  std::optional<std::string> want;
  if (mode == SubgraphMode::GT || mode == SubgraphMode::GTS) want = "T";
  if (mode == SubgraphMode::GF || mode == SubgraphMode::GFS) want = "F";

  // Seeds come from the full C relation even when the seed edge is looping.
  std::set<NodeId> result;
  std::vector<NodeId> work;
  for (const auto& e : pdg_.edges) {
    if (e.kind != EdgeKind::C || e.src != p) continue;
    if (want && e.tag != *want) continue;
    if (result.insert(e.dst).second) work.push_back(e.dst);
  }

  const std::set<NodeId>* barrier = nullptr;
  if (!starred) {
    auto it = cyclic_scc_.find(p);
    if (it != cyclic_scc_.end()) barrier = &it->second;
  }
  const std::vector<EdgeKey>& closure_edges =
      starred ? pdg_.edges : c_hat_;

  while (!work.empty()) {
    NodeId n = work.back();
    work.pop_back();
    // Within a cyclic component the non-starred closure stops: onward
    // control structure belongs to the next iteration of the loop, not to
    // the branch rooted at p.
    if (barrier && barrier->count(n)) continue;
    for (const auto& e : closure_edges) {
      if (e.kind != EdgeKind::C || e.src != n) continue;
      if (result.insert(e.dst).second) work.push_back(e.dst);
    }
  }
  return result;
}

std::set<NodeId> PdgAnalysis::subgraph_plain(NodeId p,
                                             const std::string& label) const {
  std::set<NodeId> result;
  std::vector<NodeId> work;
  for (const auto& e : c_hat_) {
    if (e.kind != EdgeKind::C || e.src != p) continue;
    if (e.tag != label) continue;
    if (result.insert(e.dst).second) work.push_back(e.dst);
  }

  const std::set<NodeId>* barrier = nullptr;
  auto it = cyclic_scc_.find(p);
  if (it != cyclic_scc_.end()) barrier = &it->second;

  while (!work.empty()) {
    NodeId n = work.back();
    work.pop_back();
    if (barrier && barrier->count(n)) continue;
    for (const auto& e : c_hat_) {
      if (e.kind != EdgeKind::C || e.src != n) continue;
      if (result.insert(e.dst).second) work.push_back(e.dst);
    }
  }
  return result;
}

std::set<NodeId> PdgAnalysis::cyclic_component(NodeId n) const {
  auto it = cyclic_scc_.find(n);
  return it == cyclic_scc_.end() ? std::set<NodeId>{} : it->second;
}

std::set<NodeId> PdgAnalysis::subgraph_region(NodeId p,
                                              const std::string& label) const {
  std::set<NodeId> result;
  std::vector<NodeId> work;
  auto add = [&](NodeId m) {
    if (m != p && result.insert(m).second) work.push_back(m);
  };
  for (const auto& e : pdg_.edges)
    if (e.kind == EdgeKind::C && e.src == p && e.tag == label) add(e.dst);

  // The walk descends through looping edges as well: a node behind an
  // inner loop of the branch, or re-activated by a test further down, can
  // still execute before p runs again. Only p itself never joins the
  // region: it has just been evaluated.
  while (!work.empty()) {
    NodeId n = work.back();
    work.pop_back();
    for (const auto& e : pdg_.edges) {
      if (e.kind != EdgeKind::C || e.src != n) continue;
      add(e.dst);
    }
  }
  return result;
}

const std::vector<std::vector<NodeId>>& PdgAnalysis::simple_paths(
    NodeId p) const {
  auto it = path_cache_.find(p);
  if (it != path_cache_.end()) return it->second;

  std::vector<std::vector<NodeId>> paths;
  std::vector<NodeId> cur{kEntryNode};
  std::set<NodeId> on_path{kEntryNode};
  auto dfs = [&](auto&& self, NodeId n) -> void {
    if (n == p) {
      paths.push_back(cur);
      if (paths.size() > mca_pair_limit_)
        throw std::runtime_error("mca: simple-path limit exceeded");
      return;
    }
    for (NodeId s : cdg_.successors(n)) {
      if (on_path.count(s)) continue;
      cur.push_back(s);
      on_path.insert(s);
      self(self, s);
      cur.pop_back();
      on_path.erase(s);
    }
  };
  if (p == kEntryNode) {
    paths.push_back({kEntryNode});
  } else {
    dfs(dfs, kEntryNode);
  }
  return path_cache_[p] = std::move(paths);
}

std::set<NodeId> PdgAnalysis::mca(NodeId p, NodeId q) const {
  if (p == q) throw std::invalid_argument("mca requires distinct nodes");
  auto key = std::minmax(p, q);
  auto it = mca_cache_.find(key);
  if (it != mca_cache_.end()) return it->second;

  const auto& pp = simple_paths(key.first);
  const auto& qq = simple_paths(key.second);
  if (pp.size() * qq.size() > mca_pair_limit_)
    throw std::runtime_error("mca: path-pair limit exceeded");

  std::set<NodeId> out;
  for (const auto& a : pp) {
    for (const auto& b : qq) {
      size_t i = 0;
      while (i < a.size() && i < b.size() && a[i] == b[i]) i++;
      if (i > 0) out.insert(a[i - 1]);
    }
  }
  return mca_cache_[key] = out;
}

namespace {

std::string dot_id(NodeId n) {
  if (n == kEntryNode) return "entry";
  if (n == kExitNode) return "exit";
  return "n" + std::to_string(n);
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string export_dot(const Cfg& cfg) {
  std::string out = "digraph cfg {\n";
  for (const auto& [id, stmt] : cfg.nodes)
    out += "  " + dot_id(id) + " [label=\"" + std::to_string(id) + ": " +
           dot_escape(to_string(stmt)) + "\"];\n";
  std::vector<CfgEdge> edges = cfg.edges;
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) {
    out += "  " + dot_id(e.src) + " -> " + dot_id(e.dst);
    if (e.label == EdgeLabel::T) out += " [label=\"T\"]";
    if (e.label == EdgeLabel::F) out += " [label=\"F\"]";
    out += ";\n";
  }
  out += "}\n";
  return out;
}

std::string export_dot(const Pdg& pdg) {
  std::string out = "digraph pdg {\n";
  for (NodeId n : pdg.nodes) {
    std::string label = node_name(n);
    auto it = pdg.statements.find(n);
    if (it != pdg.statements.end())
      label += ": " + dot_escape(to_string(it->second));
    out += "  " + dot_id(n) + " [label=\"" + label + "\"];\n";
  }
  for (const auto& e : pdg.edges) {
    out += "  " + dot_id(e.src) + " -> " + dot_id(e.dst);
    switch (e.kind) {
      case EdgeKind::C:
        out += " [label=\"" + e.tag + "\"]";
        break;
      case EdgeKind::F:
        out += " [style=dashed, label=\"" + dot_escape(e.tag) + "\"]";
        break;
      case EdgeKind::L:
        out += " [style=dotted, label=\"" + dot_escape(e.tag) + "\"]";
        break;
      case EdgeKind::D:
        out += " [style=bold]";
        break;
    }
    out += ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace pdgsem
