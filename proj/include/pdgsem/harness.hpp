#pragma once

#include "pdgsem/determinism.hpp"
#include "pdgsem/pdg_exec.hpp"

namespace pdgsem {

inline constexpr int kDefaultCfgBound = 10000;
inline constexpr size_t kDefaultMaxStates = 100000;
inline constexpr size_t kDefaultMaxDepth = 10000;

// Breadth-first expansion of the full interleaving space from init_state.
// Quiescent states are split by whether the return statement ever ran
// ("stuck" otherwise); the histogram maps run length to the number of
// distinct quiescent outcomes reached at that length.
struct Exploration {
  enum class Verdict : uint8_t { Complete, StateLimit, DepthLimit, RuntimeError };

  Verdict verdict = Verdict::Complete;
  size_t state_count = 0;       // distinct states encountered
  size_t transition_count = 0;
  std::set<PdgState> final_states;
  std::set<PdgState> stuck_states;
  std::map<size_t, size_t> run_length_histogram;
  std::set<Value> return_values;  // recorded when the ret node executed
  std::vector<PdgState> states;   // every distinct explored state
  std::string error;
};

Exploration explore_all(const PdgMachine& m, const Store& init,
                        size_t max_states = kDefaultMaxStates,
                        size_t max_depth = kDefaultMaxDepth);

struct ConfluenceResult {
  bool pass = false;
  // A failed check on a graph the determinism checker accepted indicates an
  // implementation bug, not a property of the input.
  bool alarm = false;
  std::string detail;
};

ConfluenceResult check_confluence(const Exploration& e, const DpdgReport& d);

struct EquivResult {
  enum class Verdict : uint8_t { Pass, Fail, Skipped };

  Verdict verdict = Verdict::Skipped;
  std::optional<Value> cfg_returned;
  std::set<Value> pdg_returned;
  bool guided_ok = false;
  bool explored = false;  // exhaustive leg completed; else sampled runs
  std::string detail;
};

EquivResult check_equivalence(const Cfg& cfg, const Store& init,
                              int bound = kDefaultCfgBound);

struct AuditReport {
  size_t states_checked = 0;
  size_t pairs_checked = 0;
  std::vector<std::string> failures;
};

// Pairwise-executability invariants over every state in `states`. The
// unconditional checks assert mutual subgraph exclusion and the absence of
// F/L edges between simultaneously executable nodes; when `deterministic`
// the stronger persistence, disjointness and commuting-diamond checks run.
AuditReport lemma_audit(const PdgMachine& m,
                        const std::vector<PdgState>& states,
                        bool deterministic);

struct RandomCfgParams {
  int max_nodes = 12;
  double loop_bias = 0.4;
  int max_vars = 3;
};

// Deterministic in (seed, params); output always passes validate_cfg; with
// loop_bias 0 the result is acyclic.
Cfg random_cfg(uint64_t seed, const RandomCfgParams& params = {});

struct FuzzReport {
  uint64_t seed = 0;
  size_t count = 0;
  RandomCfgParams params;

  size_t programs = 0;
  size_t terminated = 0;
  size_t deterministic = 0;
  size_t condition_violations_23 = 0;
  size_t static_lemma_failures = 0;
  size_t guided_failures = 0;
  size_t equivalence_failures = 0;
  size_t confluence_checked = 0;
  size_t confluence_failures = 0;
  size_t confluence_alarms = 0;
  size_t audit_failures = 0;
  size_t stuck_states = 0;
  std::vector<std::string> failure_lines;

  bool clean() const {
    return condition_violations_23 == 0 && static_lemma_failures == 0 &&
           guided_failures == 0 && equivalence_failures == 0 &&
           confluence_failures == 0 && audit_failures == 0;
  }

  std::string text() const;
};

FuzzReport fuzz_campaign(uint64_t seed, size_t count,
                         const RandomCfgParams& params = {});

}  // namespace pdgsem
