#pragma once

#include "pdgsem/dependence.hpp"

namespace pdgsem {

enum class EdgeKind : uint8_t { C, F, L, D };

const char* kind_name(EdgeKind k);

// Identity of one edge of the direct sum C ⊕ F ⊕ L ⊕ D. The tag is the
// T/F label for C edges, the variable for F/L edges, and empty for D.
struct EdgeKey {
  EdgeKind kind = EdgeKind::C;
  NodeId src = 0;
  NodeId dst = 0;
  std::string tag;

  auto operator<=>(const EdgeKey&) const = default;
};

std::string to_string(const EdgeKey& e);

EdgeKey ct(NodeId src, NodeId dst);
EdgeKey cf(NodeId src, NodeId dst);
EdgeKey fd(NodeId src, NodeId dst, std::string var);
EdgeKey ld(NodeId src, NodeId dst, std::string var);
EdgeKey dd(NodeId src, NodeId dst);

struct Pdg {
  std::map<NodeId, Statement> statements;  // program nodes only
  std::vector<NodeId> nodes;               // sorted; includes kEntryNode
  std::vector<EdgeKey> edges;              // sorted

  std::vector<EdgeKey> edges_of_kind(EdgeKind k) const;
  std::vector<EdgeKey> out_edges(NodeId n, EdgeKind k) const;
  std::vector<EdgeKey> in_edges(NodeId n, EdgeKind k) const;
};

// Control edges from entry and if-nodes (true/false control dependence),
// flow edges from LIDD, loop-carried edges from LCDD, def-order edges from
// DefOrd.
Pdg build_pdg(const Cfg& cfg);

// For hand-built graphs in tests and checker counterexamples.
Pdg pdg_from_parts(std::map<NodeId, Statement> statements,
                   std::vector<EdgeKey> edges);

// Empty iff the structural invariants hold.
std::vector<std::string> validate_pdg(const Pdg& pdg);

// G, G_T, G_F close seeds over Ĉ; the starred variants close over full C.
enum class SubgraphMode : uint8_t { G, GT, GF, GS, GTS, GFS };

const char* mode_name(SubgraphMode m);
std::optional<SubgraphMode> parse_mode(const std::string& s);

Digraph cdg_of(const Pdg& pdg);

std::set<EdgeKey> looping_edges(const Pdg& pdg, const LoopSet& cdg_loops);

// One if-node set per loop (same order as loops.loops): members with a
// successor inside and a successor outside the loop.
std::vector<std::set<NodeId>> iteration_statements(const Cfg& cfg,
                                                   const LoopSet& loops);

inline constexpr size_t kMcaPairLimit = 100000;

// Caches the derived structures of one Pdg: CDG loops, looping edges, Ĉ,
// the six subgraph flavors, and minimal common ancestors.
class PdgAnalysis {
 public:
  explicit PdgAnalysis(Pdg pdg, size_t mca_pair_limit = kMcaPairLimit);

  const Pdg& pdg() const { return pdg_; }
  const LoopSet& cdg_loops() const { return cdg_loops_; }
  const std::set<EdgeKey>& looping() const { return looping_; }
  const std::vector<EdgeKey>& c_hat() const { return c_hat_; }

  std::set<NodeId> subgraph(NodeId p, SubgraphMode mode) const;

  // The part of G_T(p)/G_F(p) rooted at p's non-looping seed edges: the
  // statements of the current iteration level, as opposed to the ones
  // scheduled for the next pass of a loop headed at p.
  std::set<NodeId> subgraph_plain(NodeId p, const std::string& label) const;

  // Everything that can execute between a commit of p's `label` branch and
  // p's next execution: unlike the plain subgraphs the walk descends
  // through looping edges, reaching statements that sit behind an inner
  // loop of the branch or behind a test of p's own control cycle. Only p
  // itself is excluded.
  std::set<NodeId> subgraph_region(NodeId p, const std::string& label) const;

  // Cyclic strongly connected component of n in the control-dependence
  // graph; empty if n lies on no control cycle.
  std::set<NodeId> cyclic_component(NodeId n) const;

  // Last nodes of the longest common prefixes over all pairs of simple CDG
  // paths entry→p × entry→q. Throws std::runtime_error past the pair limit.
  std::set<NodeId> mca(NodeId p, NodeId q) const;

 private:
  Pdg pdg_;
  Digraph cdg_;
  LoopSet cdg_loops_;
  std::set<EdgeKey> looping_;
  std::vector<EdgeKey> c_hat_;
  std::map<NodeId, std::set<NodeId>> cyclic_scc_;  // node → its cyclic CDG SCC
  size_t mca_pair_limit_;
  mutable std::map<std::pair<NodeId, NodeId>, std::set<NodeId>> mca_cache_;
  mutable std::map<NodeId, std::vector<std::vector<NodeId>>> path_cache_;

  const std::vector<std::vector<NodeId>>& simple_paths(NodeId p) const;
};

std::string export_dot(const Cfg& cfg);
std::string export_dot(const Pdg& pdg);

}  // namespace pdgsem
