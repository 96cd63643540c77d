#pragma once

#include <array>
#include <random>

#include "pdgsem/pdg.hpp"

namespace pdgsem {

enum class EdgeStatus : uint8_t { Chk, Unchk, Act };

const char* status_name(EdgeStatus s);

// Avail is stored node-major (node index * |vars| + var index) over program
// nodes; econf is indexed by the position of the edge in the Pdg's sorted
// edge vector. Two states compare equal iff both maps agree pointwise.
struct PdgState {
  std::vector<Value> avail;
  std::vector<EdgeStatus> econf;

  auto operator<=>(const PdgState&) const = default;
};

struct PdgRun {
  enum class Verdict : uint8_t { Quiescent, BoundExceeded, RuntimeError };

  std::vector<NodeId> executed;
  PdgState final_state;
  Verdict verdict = Verdict::Quiescent;
  std::string error;
  bool ret_executed = false;
  std::optional<Value> returned;        // av(ret, x) when Ret executed
  std::optional<Value> returned_final;  // av(ret, x) in the final state
};

enum class Strategy : uint8_t { MinId, SeededRandom };

// Executable representation of one PDG: node/variable/edge indexing,
// per-node edge lists and subgraph bitmasks (whence the 64-node limit).
class PdgMachine {
 public:
  explicit PdgMachine(const Cfg& cfg);
  explicit PdgMachine(Pdg pdg);

  const Pdg& pdg() const { return analysis_.pdg(); }
  const PdgAnalysis& analysis() const { return analysis_; }

  size_t node_count() const { return nodes_.size(); }
  size_t var_count() const { return vars_.size(); }
  const std::vector<NodeId>& program_nodes() const { return nodes_; }
  const std::vector<std::string>& variables() const { return vars_; }
  NodeId ret_node() const { return ret_node_; }
  const std::string& ret_var() const { return ret_var_; }

  PdgState init_state(const Store& init) const;

  std::vector<NodeId> next_nodes(const PdgState& s) const;
  bool executable(const PdgState& s, NodeId n) const;

  // One transition; n must be executable in s (std::invalid_argument
  // otherwise). EvalError propagates to the caller.
  PdgState step(const PdgState& s, NodeId n) const;

  PdgRun run(const Store& init, Strategy strategy, uint64_t seed,
             int bound) const;

  Value avail_value(const PdgState& s, NodeId n, const std::string& var) const;
  EdgeStatus status(const PdgState& s, const EdgeKey& e) const;

  const std::vector<EdgeKey>& edges() const { return analysis_.pdg().edges; }

  uint64_t subgraph_mask(NodeId n, SubgraphMode mode) const;

 private:
  PdgAnalysis analysis_;
  // First segment of each branch window, available when the machine was
  // built from a graph: nodes reachable from the committed successor
  // without crossing a back edge. They execute before any node the window
  // reaches only by wrapping around a loop, which decides whether the
  // producer or the consumer of a dependence edge goes first after a
  // commit. Machines built from a bare dependence graph fall back to a
  // looping-edge approximation.
  std::map<std::pair<NodeId, std::string>, std::set<NodeId>> segment_;
  // Loop-carried edges whose consumer does not run before the producer in
  // the first pass: they start in act (the consumer owes no read yet and
  // instead waits for the first delivery).
  std::set<size_t> init_l_act_;
  // Reachability of the back-edge-free graph; only filled alongside
  // segment_. A pending read owed by a node that reaches the committing
  // test this way precedes the commit in program order and stays owed.
  std::map<NodeId, std::set<NodeId>> fwd_reach_;
  std::vector<NodeId> nodes_;        // program nodes, sorted
  std::vector<std::string> vars_;    // sorted
  std::map<NodeId, int> node_idx_;
  std::map<std::string, int> var_idx_;
  NodeId ret_node_ = 0;
  std::string ret_var_;

  std::vector<std::vector<int>> in_c_, in_f_, in_d_, in_l_, out_l_,
      out_fd_;  // per node idx
  std::map<NodeId, std::array<uint64_t, 6>> masks_;

  void index_graph();
  Value eval_at(const PdgState& s, NodeId n, const Expr& e) const;
  void apply_udav(PdgState& out, const PdgState& pre, NodeId n) const;
  void apply_udec(PdgState& out, const PdgState& pre, NodeId n) const;
};

struct GuidedResult {
  bool ok = false;
  size_t fail_index = 0;  // index into the trace when !ok
  std::string reason;
  PdgRun run;
};

// Replays a terminated CFG trace against the PDG, asserting at every step
// that the node is executable and that the store agrees with the node's
// avail row on its used variables.
GuidedResult guided_run(const PdgMachine& m, const Store& init,
                        const CfgTrace& trace);

}  // namespace pdgsem
