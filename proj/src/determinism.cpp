#include "pdgsem/determinism.hpp"

#include <algorithm>

namespace pdgsem {

namespace {

std::string pair_witness(NodeId p, NodeId q) {
  return "p=" + node_name(p) + " q=" + node_name(q);
}

}  // namespace

DpdgReport check_dpdg(const PdgAnalysis& a) {
  DpdgReport report;
  const Pdg& pdg = a.pdg();

  auto in_sub = [&](NodeId member, NodeId root, SubgraphMode mode) {
    return a.subgraph(root, mode).count(member) > 0;
  };
  auto shared_branch = [&](NodeId p, NodeId q, SubgraphMode t_mode,
                           SubgraphMode f_mode) -> std::optional<std::string> {
    // Some minimal common ancestor whose one branch contains both nodes —
    // unless another common ancestor splits the pair across its two
    // branch windows: when one node only ever runs between a T commit and
    // the test's next turn and the other only after an F commit, the
    // test's own executions serialize them and no race can arise.
    std::optional<std::string> found;
    for (NodeId r : a.mca(p, q)) {
      auto rt = a.subgraph_region(r, "T");
      auto rf = a.subgraph_region(r, "F");
      bool prt = rt.count(p) > 0, qrt = rt.count(q) > 0;
      bool prf = rf.count(p) > 0, qrf = rf.count(q) > 0;
      if ((prt && !prf && qrf && !qrt) || (prf && !prt && qrt && !qrf))
        return std::nullopt;
      auto t = a.subgraph(r, t_mode);
      auto f = a.subgraph(r, f_mode);
      if (!found && t.count(p) && t.count(q))
        found = "r=" + node_name(r) + " label=T";
      else if (!found && f.count(p) && f.count(q))
        found = "r=" + node_name(r) + " label=F";
    }
    return found;
  };

  // Condition 1: concurrent activation of one target.
  auto c_edges = pdg.edges_of_kind(EdgeKind::C);
  for (size_t i = 0; i < c_edges.size(); i++) {
    for (size_t j = i + 1; j < c_edges.size(); j++) {
      NodeId p = c_edges[i].src, q = c_edges[j].src;
      if (c_edges[i].dst != c_edges[j].dst || p == q) continue;
      if (in_sub(p, q, SubgraphMode::GS) || in_sub(q, p, SubgraphMode::GS))
        continue;
      if (auto w =
              shared_branch(p, q, SubgraphMode::GTS, SubgraphMode::GFS))
        report.violations.push_back(
            {1, pair_witness(p, q) + " n=" + node_name(c_edges[i].dst) +
                    " " + *w});
    }
  }

  // Condition 2: two unordered definitions flowing to one use. Loop-carried
  // edges deliver values to their target the same way flow edges do, so a
  // writer pair must be ordered regardless of how either value travels.
  auto f_edges = pdg.edges_of_kind(EdgeKind::F);
  {
    auto l_edges = pdg.edges_of_kind(EdgeKind::L);
    f_edges.insert(f_edges.end(), l_edges.begin(), l_edges.end());
  }
  auto has_d = [&](NodeId p, NodeId q) {
    for (const auto& e : pdg.edges)
      if (e.kind == EdgeKind::D && e.src == p && e.dst == q) return true;
    return false;
  };
  for (size_t i = 0; i < f_edges.size(); i++) {
    for (size_t j = i + 1; j < f_edges.size(); j++) {
      NodeId p = f_edges[i].src, q = f_edges[j].src;
      if (p == q || f_edges[i].dst != f_edges[j].dst ||
          f_edges[i].tag != f_edges[j].tag)
        continue;
      // The non-starred subgraphs matter here: a writer reachable only by
      // wrapping around the branch's control cycle executes in a later
      // activation window, serialized against this one by the test's own
      // successive commits.
      auto w = shared_branch(p, q, SubgraphMode::GT, SubgraphMode::GF);
      if (!w) continue;
      if (!has_d(p, q) && !has_d(q, p))
        report.violations.push_back(
            {2, pair_witness(p, q) + " u=" + node_name(f_edges[i].dst) +
                    " var=" + f_edges[i].tag + " " + *w +
                    " without a def-order edge"});
    }
  }

  // Condition 3: data edges crossing out of a loop's body.
  for (const auto& e : pdg.edges) {
    if (e.kind != EdgeKind::F && e.kind != EdgeKind::D) continue;
    for (const auto& loop : a.cdg_loops().loops) {
      for (NodeId r : loop.nodes) {
        if (in_sub(e.src, r, SubgraphMode::G) &&
            !in_sub(e.dst, r, SubgraphMode::GS)) {
          report.violations.push_back(
              {3, "edge " + to_string(e) + " r=" + node_name(r) +
                      ": source in G(r) but target outside G*(r)"});
        }
      }
    }
  }

  std::sort(report.violations.begin(), report.violations.end());
  report.violations.erase(
      std::unique(report.violations.begin(), report.violations.end()),
      report.violations.end());
  report.deterministic = report.violations.empty();
  return report;
}

DpdgReport check_dpdg(const Pdg& pdg) { return check_dpdg(PdgAnalysis(pdg)); }

}  // namespace pdgsem
