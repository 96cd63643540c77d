#pragma once

#include <map>
#include <utility>

#include "pdgsem/cfg.hpp"

namespace pdgsem {

// Plain directed graph, the common carrier for loop enumeration and
// reachability over CFGs and control-dependence graphs alike.
struct Digraph {
  std::set<NodeId> nodes;
  std::set<std::pair<NodeId, NodeId>> edges;

  std::vector<NodeId> successors(NodeId n) const;
  std::vector<NodeId> predecessors(NodeId n) const;
};

Digraph digraph_of(const Cfg& cfg);
Digraph digraph_of(const AugmentedCfg& g);

// Strong post-dominance. dominated(t) is the least fixpoint A(t):
// A0 = {t}; A_{k+1} = A_k ∪ {s : succ(s) ≠ ∅ ∧ succ(s) ⊆ A_k}.
// Nodes that can avoid t forever (by cycling or by reaching a different
// dead end) are never added.
class PostDomRelation {
 public:
  explicit PostDomRelation(const Digraph& g);

  // t post-dominates s.
  bool pdom(NodeId t, NodeId s) const;
  bool strictly_pdom(NodeId t, NodeId s) const;

  const std::set<NodeId>& dominated(NodeId t) const;

 private:
  std::map<NodeId, std::set<NodeId>> dominated_;
};

PostDomRelation strong_postdom(const AugmentedCfg& g);

struct CdEdge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeLabel label = EdgeLabel::T;

  auto operator<=>(const CdEdge&) const = default;
};

// (s,t,Q) iff s has a Q-labeled successor u with t post-dominating u and t
// does not strictly post-dominate s. Sources are entry and if-nodes;
// targets are program nodes.
std::vector<CdEdge> control_dependence(const AugmentedCfg& g,
                                       const PostDomRelation& pd);
std::vector<CdEdge> control_dependence(const AugmentedCfg& g);

// A loop is any node subset whose induced subgraph is strongly connected
// and has at least one edge; nested and overlapping loops are all reported.
// A back edge is an induced edge whose target also has a predecessor
// outside the loop.
struct Loop {
  std::set<NodeId> nodes;
  std::set<std::pair<NodeId, NodeId>> back_edges;

  auto operator<=>(const Loop&) const = default;
};

struct LoopSet {
  std::vector<Loop> loops;  // sorted

  bool same_loop(NodeId s, NodeId t) const;

  // Union of back edges over every loop containing both s and t.
  std::set<std::pair<NodeId, NodeId>> be(NodeId s, NodeId t) const;

  // Union of back edges over all loops.
  std::set<std::pair<NodeId, NodeId>> all_back_edges() const;
};

inline constexpr int kExhaustiveLoopLimit = 16;

// Subset enumeration; requires |nodes| <= kExhaustiveLoopLimit.
LoopSet enumerate_loops_exhaustive(const Digraph& g);

// Condensation-based enumeration: recursively shrink each strongly
// connected component one vertex at a time, collecting every strongly
// connected subset. Equivalent to the exhaustive method on any graph.
LoopSet enumerate_loops_scc(const Digraph& g);

// Dispatches on graph size.
LoopSet enumerate_loops(const Digraph& g);

// Loop nesting forest. The top-level loops are the nontrivial strongly
// connected components; each loop's back edges are its induced edges that
// point at a node also entered from outside the loop. Removing a loop's
// back edges and re-running the decomposition on its interior yields the
// nested loops. Unlike enumerate_loops this reports only the loops that
// act as genuine iteration boundaries, so its back-edge unions are the
// right notion for classifying data dependences as intra- or
// cross-iteration. `root` marks where execution enters the graph, so the
// outermost component is considered entered even if no edge reaches it.
LoopSet loop_forest(const Digraph& g, NodeId root);
LoopSet loop_forest(const Cfg& cfg);

struct DataDep {
  NodeId src = 0;
  NodeId dst = 0;
  std::string var;

  auto operator<=>(const DataDep&) const = default;
};

// True iff a path of >= 1 edge from s to t exists whose interior nodes do
// not define w and which avoids every edge in forbidden.
bool reaching_path_exists(
    const Cfg& cfg, NodeId s, NodeId t, const std::string& w,
    const std::set<std::pair<NodeId, NodeId>>& forbidden);

struct DataDeps {
  std::vector<DataDep> lidd;
  std::vector<DataDep> lcdd;
};

DataDeps data_dependence(const Cfg& cfg, const LoopSet& loops);

struct DefOrdDep {
  NodeId src = 0;
  NodeId dst = 0;
  std::string var;      // the variable both endpoints define
  NodeId witness = 0;   // shared use fed by both definitions

  auto operator<=>(const DefOrdDep&) const = default;
};

// `flow` is the union of the loop-independent and loop-carried data
// dependences: two definitions need an order whenever both deliver their
// value to the same use, no matter how either value travels there.
std::vector<DefOrdDep> def_order_dependence(const Cfg& cfg,
                                            const std::vector<DataDep>& flow,
                                            const LoopSet& loops);

// Reflexive reachability over the program graph; the primed variants are
// computed after deleting the union of all loops' back edges.
struct ReachSets {
  std::set<NodeId> r, r_noback, ur, ur_noback;
};

ReachSets reach_sets(const Cfg& cfg, const LoopSet& loops, NodeId n);

struct DependenceSets {
  std::vector<CdEdge> cd;
  std::vector<DataDep> lidd;
  std::vector<DataDep> lcdd;
  std::vector<DefOrdDep> def_ord;
  LoopSet loops;   // every strongly connected subset
  LoopSet forest;  // loop nesting forest used for the data-dep split
};

DependenceSets analyze_dependences(const Cfg& cfg);

}  // namespace pdgsem
