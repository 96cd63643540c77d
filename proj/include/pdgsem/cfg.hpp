#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "pdgsem/expr.hpp"

namespace pdgsem {

using NodeId = int;

// Reserved ids for the synthetic nodes of an augmented CFG. Parsed programs
// only use non-negative ids, so these never collide.
inline constexpr NodeId kEntryNode = -1;
inline constexpr NodeId kExitNode = -2;

std::string node_name(NodeId n);  // "entry", "exit" or the decimal id

enum class EdgeLabel : uint8_t { None, T, F };

// One of the three statement forms: x := e, if e, ret x.
struct Statement {
  enum class Kind : uint8_t { Assign, If, Ret };

  Kind kind = Kind::Ret;
  std::string var;  // assignment target, or the returned variable
  ExprPtr expr;     // assignment rhs, or the branch condition

  static Statement assign(std::string target, ExprPtr rhs);
  static Statement branch(ExprPtr cond);
  static Statement ret(std::string var);

  std::set<std::string> uses() const;
  std::optional<std::string> def() const;
};

std::string to_string(const Statement& s);

struct CfgEdge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeLabel label = EdgeLabel::None;

  auto operator<=>(const CfgEdge&) const = default;
};

struct Cfg {
  std::map<NodeId, Statement> nodes;
  std::vector<CfgEdge> edges;  // kept sorted by (src, dst, label)
  NodeId start = 0;

  std::vector<NodeId> successors(NodeId n) const;
  std::optional<NodeId> successor(NodeId n, EdgeLabel l) const;
  std::vector<NodeId> predecessors(NodeId n) const;
  bool has_edge(NodeId src, NodeId dst) const;

  // The unique node without successors; asserts validity was checked.
  NodeId ret_node() const;

  // Every identifier used or defined anywhere in the program.
  std::set<std::string> variables() const;

  void sort_edges();
};

// The original graph plus entry/exit: entry -T-> start, entry -F-> exit,
// ret -> exit. Original nodes and edges are unchanged.
struct AugmentedCfg {
  Cfg cfg;
  std::vector<NodeId> nodes;   // program nodes plus kEntryNode, kExitNode
  std::vector<CfgEdge> edges;  // program edges plus the three synthetic ones

  std::vector<NodeId> successors(NodeId n) const;
  std::optional<NodeId> successor(NodeId n, EdgeLabel l) const;
};

AugmentedCfg augment_cfg(const Cfg& cfg);

// Empty iff all structural invariants hold; otherwise one entry per
// violation. Violations are data, not exceptions.
std::vector<std::string> validate_cfg(const Cfg& cfg);

using Store = std::map<std::string, Value>;

struct CfgTrace {
  enum class Verdict : uint8_t { Terminated, BoundExceeded, RuntimeError };

  struct Step {
    NodeId node;
    Store before;
  };

  std::vector<Step> steps;
  Store final_store;
  Verdict verdict = Verdict::Terminated;
  std::string error;
  std::optional<Value> returned;
};

// One small step of the operational semantics: returns the successor (or
// nullopt when n is the return node) and the updated store. Throws
// EvalError on expression failures or a non-truth branch condition.
std::pair<std::optional<NodeId>, Store> cfg_step(const Cfg& cfg, NodeId n,
                                                 const Store& store);

// Iterates cfg_step from the start node. The initial store must be total
// over the program's variables (std::invalid_argument otherwise).
CfgTrace cfg_run(const Cfg& cfg, const Store& init, int bound);

// --- text format -----------------------------------------------------------

struct ParseError : std::runtime_error {
  ParseError(int line, const std::string& msg);
  int line;
};

Cfg parse_cfg(const std::string& text);

// Canonical form: nodes ascending by id, then edges ascending by
// (src, dst, label). parse(print(c)) reproduces c exactly.
std::string print_cfg(const Cfg& cfg);

Store parse_store(const std::string& text);  // "x=1,y=T" or newline-separated
std::string print_store(const Store& s);

// Fails (std::invalid_argument) unless the store binds exactly the
// program's variable set.
void require_total_store(const Cfg& cfg, const Store& s);

}  // namespace pdgsem
