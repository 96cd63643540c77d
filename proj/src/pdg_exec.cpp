#include "pdgsem/pdg_exec.hpp"

#include <algorithm>

#include "pdgsem/dependence.hpp"

namespace pdgsem {

const char* status_name(EdgeStatus s) {
  switch (s) {
    case EdgeStatus::Chk:
      return "chk";
    case EdgeStatus::Unchk:
      return "unchk";
    case EdgeStatus::Act:
      return "act";
  }
  return "?";
}

PdgMachine::PdgMachine(const Cfg& cfg) : analysis_(build_pdg(cfg)) {
  index_graph();

  auto back = loop_forest(cfg).all_back_edges();
  std::map<NodeId, std::vector<NodeId>> succ;
  for (const auto& e : cfg.edges)
    if (!back.count({e.src, e.dst})) succ[e.src].push_back(e.dst);
  for (const auto& [id, stmt] : cfg.nodes) {
    if (stmt.kind != Statement::Kind::If) continue;
    for (const auto& e : cfg.edges) {
      if (e.src != id) continue;
      // The window closes when the committing test runs again, so the
      // walk never expands through it. A committed edge that is itself a
      // back edge wraps around immediately: its segment is empty.
      std::set<NodeId> seg;
      std::vector<NodeId> work;
      if (!back.count({e.src, e.dst}) && e.dst != id &&
          seg.insert(e.dst).second)
        work.push_back(e.dst);
      while (!work.empty()) {
        NodeId m = work.back();
        work.pop_back();
        for (NodeId s : succ[m])
          if (s != id && seg.insert(s).second) work.push_back(s);
      }
      segment_[{id, e.label == EdgeLabel::T ? "T" : "F"}] = std::move(seg);
    }
  }

  // A loop-carried edge normally starts unchk: the consumer's first read
  // of the initial value precedes the producer's first write. When the
  // first pass runs the producer first — the consumer is unreachable
  // without wrapping around, or sits later on the path — there is no
  // pending read and the consumer waits for the delivery instead.
  for (const auto& [id, stmt] : cfg.nodes) {
    std::set<NodeId>& seen = fwd_reach_[id];
    std::vector<NodeId> work{id};
    seen.insert(id);
    while (!work.empty()) {
      NodeId m = work.back();
      work.pop_back();
      for (NodeId s : succ[m])
        if (seen.insert(s).second) work.push_back(s);
    }
  }
  // The consumer owes a first read only if the first pass can actually
  // reach it before the producer: a path from the start that avoids the
  // producer and crosses no back edge.
  auto first_read_possible = [&](NodeId producer, NodeId consumer) {
    std::set<NodeId> seen{cfg.start, producer};
    std::vector<NodeId> work{cfg.start};
    if (cfg.start == producer) return false;
    while (!work.empty()) {
      NodeId m = work.back();
      work.pop_back();
      if (m == consumer) return true;
      for (NodeId s : succ[m])
        if (seen.insert(s).second) work.push_back(s);
    }
    return false;
  };
  const auto& pedges = analysis_.pdg().edges;
  for (size_t ei = 0; ei < pedges.size(); ei++) {
    const EdgeKey& e = pedges[ei];
    if (e.kind != EdgeKind::L || e.src == e.dst) continue;
    if (!first_read_possible(e.src, e.dst)) init_l_act_.insert(ei);
  }
}

PdgMachine::PdgMachine(Pdg pdg) : analysis_(std::move(pdg)) { index_graph(); }

void PdgMachine::index_graph() {
  const Pdg& pdg = analysis_.pdg();
  for (const auto& [id, stmt] : pdg.statements) {
    nodes_.push_back(id);
    auto u = stmt.uses();
    for (const auto& v : u) var_idx_[v];
    if (auto d = stmt.def()) var_idx_[*d];
    if (stmt.kind == Statement::Kind::Ret) {
      ret_node_ = id;
      ret_var_ = stmt.var;
    }
  }
  if (nodes_.size() > 64)
    throw std::invalid_argument("graph exceeds the 64-node execution limit");
  std::sort(nodes_.begin(), nodes_.end());
  for (size_t i = 0; i < nodes_.size(); i++) node_idx_[nodes_[i]] = (int)i;
  for (auto& [name, idx] : var_idx_) {
    idx = (int)vars_.size();
    vars_.push_back(name);
  }

  in_c_.resize(nodes_.size());
  in_f_.resize(nodes_.size());
  in_d_.resize(nodes_.size());
  in_l_.resize(nodes_.size());
  out_l_.resize(nodes_.size());
  out_fd_.resize(nodes_.size());
  for (size_t ei = 0; ei < pdg.edges.size(); ei++) {
    const EdgeKey& e = pdg.edges[ei];
    auto dst = node_idx_.find(e.dst);
    auto src = node_idx_.find(e.src);
    switch (e.kind) {
      case EdgeKind::C:
        if (dst != node_idx_.end()) in_c_[dst->second].push_back((int)ei);
        break;
      case EdgeKind::F:
        if (dst != node_idx_.end()) in_f_[dst->second].push_back((int)ei);
        if (src != node_idx_.end()) out_fd_[src->second].push_back((int)ei);
        break;
      case EdgeKind::D:
        if (dst != node_idx_.end()) in_d_[dst->second].push_back((int)ei);
        if (src != node_idx_.end()) out_fd_[src->second].push_back((int)ei);
        break;
      case EdgeKind::L:
        if (src != node_idx_.end()) out_l_[src->second].push_back((int)ei);
        if (dst != node_idx_.end()) in_l_[dst->second].push_back((int)ei);
        break;
    }
  }

  for (NodeId n : nodes_) {
    std::array<uint64_t, 6> m{};
    for (SubgraphMode mode :
         {SubgraphMode::G, SubgraphMode::GT, SubgraphMode::GF, SubgraphMode::GS,
          SubgraphMode::GTS, SubgraphMode::GFS}) {
      uint64_t bits = 0;
      for (NodeId q : analysis_.subgraph(n, mode)) {
        auto it = node_idx_.find(q);
        if (it != node_idx_.end()) bits |= uint64_t{1} << it->second;
      }
      m[(size_t)mode] = bits;
    }
    masks_[n] = m;
  }
}

uint64_t PdgMachine::subgraph_mask(NodeId n, SubgraphMode mode) const {
  auto it = masks_.find(n);
  if (it == masks_.end())
    throw std::invalid_argument("unknown node " + node_name(n));
  return it->second[(size_t)mode];
}

PdgState PdgMachine::init_state(const Store& init) const {
  for (const auto& v : vars_)
    if (!init.count(v))
      throw std::invalid_argument("initial store does not bind variable '" +
                                  v + "'");
  PdgState s;
  s.avail.reserve(nodes_.size() * vars_.size());
  for (size_t ni = 0; ni < nodes_.size(); ni++)
    for (const auto& v : vars_) s.avail.push_back(init.at(v));
  const auto& edges = analysis_.pdg().edges;
  s.econf.resize(edges.size(), EdgeStatus::Unchk);
  for (size_t ei = 0; ei < edges.size(); ei++)
    if (edges[ei].kind == EdgeKind::C && edges[ei].src == kEntryNode)
      s.econf[ei] = EdgeStatus::Act;
  for (size_t ei : init_l_act_) s.econf[ei] = EdgeStatus::Act;
  return s;
}

bool PdgMachine::executable(const PdgState& s, NodeId n) const {
  auto it = node_idx_.find(n);
  if (it == node_idx_.end()) return false;
  int ni = it->second;

  bool has_act = false;
  for (int ei : in_c_[ni])
    if (s.econf[ei] == EdgeStatus::Act) has_act = true;
  if (!has_act) return false;

  // No other node of G*(n) may have an activated incoming C edge.
  uint64_t blocked = subgraph_mask(n, SubgraphMode::GS) &
                     ~(uint64_t{1} << ni);
  if (blocked) {
    for (size_t qi = 0; qi < nodes_.size(); qi++) {
      if (!(blocked & (uint64_t{1} << qi))) continue;
      for (int ei : in_c_[qi])
        if (s.econf[ei] == EdgeStatus::Act) return false;
    }
  }

  // Dependence edges have three phases. unchk: the producer has not yet
  // delivered, so the consumer waits (flow and def-order edges) or the
  // consumer has not yet read the previous value, so the producer waits
  // (loop-carried edges). act: the roles are swapped — the value is
  // already delivered but the consumer still owes its read before the
  // producer may overwrite it, or the producer owes the consumer a fresh
  // value for this pass. chk: neither side waits.
  for (int ei : in_f_[ni])
    if (s.econf[ei] == EdgeStatus::Unchk) return false;
  for (int ei : in_d_[ni])
    if (s.econf[ei] == EdgeStatus::Unchk) return false;
  for (int ei : out_fd_[ni]) {
    const EdgeKey& e = analysis_.pdg().edges[ei];
    if (e.dst == n) continue;
    if (s.econf[ei] == EdgeStatus::Act) return false;
  }
  for (int ei : out_l_[ni]) {
    const EdgeKey& e = analysis_.pdg().edges[ei];
    if (e.dst == n) continue;
    if (s.econf[ei] == EdgeStatus::Unchk) return false;
  }
  for (int ei : in_l_[ni]) {
    const EdgeKey& e = analysis_.pdg().edges[ei];
    if (e.src == n) continue;
    if (s.econf[ei] == EdgeStatus::Act) return false;
  }
  return true;
}

std::vector<NodeId> PdgMachine::next_nodes(const PdgState& s) const {
  std::vector<NodeId> out;
  for (NodeId n : nodes_)
    if (executable(s, n)) out.push_back(n);
  return out;
}

Value PdgMachine::avail_value(const PdgState& s, NodeId n,
                              const std::string& var) const {
  auto ni = node_idx_.find(n);
  auto vi = var_idx_.find(var);
  if (ni == node_idx_.end() || vi == var_idx_.end())
    throw std::invalid_argument("avail_value: unknown node or variable");
  return s.avail[ni->second * vars_.size() + vi->second];
}

EdgeStatus PdgMachine::status(const PdgState& s, const EdgeKey& e) const {
  const auto& edges = analysis_.pdg().edges;
  auto it = std::lower_bound(edges.begin(), edges.end(), e);
  if (it == edges.end() || *it != e)
    throw std::invalid_argument("status: unknown edge " + to_string(e));
  return s.econf[it - edges.begin()];
}

Value PdgMachine::eval_at(const PdgState& s, NodeId n, const Expr& e) const {
  int ni = node_idx_.at(n);
  return eval_expr(e, [&](const std::string& name) -> Value {
    auto vi = var_idx_.find(name);
    if (vi == var_idx_.end())
      throw EvalError("unbound variable '" + name + "'");
    return s.avail[ni * vars_.size() + vi->second];
  });
}

void PdgMachine::apply_udav(PdgState& out, const PdgState& pre,
                            NodeId n) const {
  const auto& stmt = analysis_.pdg().statements.at(n);
  if (stmt.kind != Statement::Kind::Assign) return;
  Value v = eval_at(pre, n, *stmt.expr);
  int vi = var_idx_.at(stmt.var);
  for (const auto& e : analysis_.pdg().edges) {
    if ((e.kind == EdgeKind::F || e.kind == EdgeKind::L) && e.src == n) {
      auto pi = node_idx_.find(e.dst);
      if (pi != node_idx_.end())
        out.avail[pi->second * vars_.size() + vi] = v;
    }
  }
}

void PdgMachine::apply_udec(PdgState& out, const PdgState& pre,
                            NodeId n) const {
  const auto& pdg = analysis_.pdg();
  const auto& edges = pdg.edges;
  auto set = [&](size_t ei, EdgeStatus st) { out.econf[ei] = st; };

  // Generic rule: consuming n releases its control and loop-carried
  // inputs, and pays off any read it owed on a flow or def-order edge.
  // The paid-off edge goes to unchk, not chk: the freed producer still
  // has to deliver before the consumer's next turn.
  for (size_t ei = 0; ei < edges.size(); ei++) {
    const EdgeKey& e = edges[ei];
    if (e.dst != n) continue;
    if (e.kind == EdgeKind::C) set(ei, EdgeStatus::Unchk);
    if (e.kind == EdgeKind::L) set(ei, EdgeStatus::Chk);
    if ((e.kind == EdgeKind::F || e.kind == EdgeKind::D) &&
        out.econf[ei] == EdgeStatus::Act)
      set(ei, EdgeStatus::Unchk);
  }

  const auto& stmt = pdg.statements.at(n);
  switch (stmt.kind) {
    case Statement::Kind::Assign:
    case Statement::Kind::Ret:
      for (size_t ei = 0; ei < edges.size(); ei++) {
        const EdgeKey& e = edges[ei];
        if (e.src != n) continue;
        if (e.kind == EdgeKind::F || e.kind == EdgeKind::D)
          set(ei, EdgeStatus::Chk);
        // Delivering the owed value frees a consumer waiting on a
        // producer-first carried edge.
        if (e.kind == EdgeKind::L && out.econf[ei] == EdgeStatus::Act)
          set(ei, EdgeStatus::Chk);
      }
      break;
    case Statement::Kind::If: {
      Value c = eval_at(pre, n, *stmt.expr);
      if (!c.is_truth())
        throw EvalError("non-truth condition at node " + node_name(n));
      bool q = c.truth_value();
      const std::string taken = q ? "T" : "F";
      SubgraphMode taken_mode = q ? SubgraphMode::GT : SubgraphMode::GF;
      SubgraphMode other_mode = q ? SubgraphMode::GF : SubgraphMode::GT;

      std::set<NodeId> g_taken = analysis_.subgraph(n, taken_mode);
      std::set<NodeId> g_other = analysis_.subgraph(n, other_mode);
      // First segment of the opened window: the nodes that run before the
      // window wraps around a back edge. Whether the producer or the
      // consumer of a dependence edge sits in it decides who goes first
      // after this commit. Without source-graph information the
      // current-level part of the taken subgraph plus n's own control
      // cycle approximate the same split.
      const std::set<NodeId>* seg = nullptr;
      auto sit = segment_.find({n, taken});
      if (sit != segment_.end()) seg = &sit->second;
      std::set<NodeId> plain = analysis_.subgraph_plain(n, taken);
      std::set<NodeId> ring = analysis_.cyclic_component(n);
      auto producer_first = [&](NodeId src, NodeId dst) {
        if (seg) return seg->count(src) != 0 && seg->count(dst) == 0;
        return (plain.count(src) != 0 && plain.count(dst) == 0) ||
               (ring.count(dst) != 0 && plain.count(dst) == 0);
      };
      auto consumer_first = [&](NodeId src, NodeId dst) {
        if (seg) return seg->count(src) == 0 && seg->count(dst) != 0;
        return plain.count(src) == 0 && plain.count(dst) != 0;
      };
      std::set<NodeId> a = g_taken;  // G_Q(n) − {n}
      a.erase(n);
      // Release set: nodes controlled only by the skipped branch. Until
      // another branch re-activates them their outgoing flow is settled,
      // so waiting consumers may proceed; a later re-activation resets the
      // same edges again. The region closure descends through looping
      // edges because a node can sit behind one halfway down the skipped
      // side and is descheduled all the same.
      std::set<NodeId> r_taken = analysis_.subgraph_region(n, taken);
      std::set<NodeId> r_other =
          analysis_.subgraph_region(n, q ? "F" : "T");
      std::set<NodeId> b;
      for (NodeId m : r_other)
        if (!r_taken.count(m)) b.insert(m);

      for (size_t ei = 0; ei < edges.size(); ei++) {
        const EdgeKey& e = edges[ei];
        switch (e.kind) {
          case EdgeKind::C:
            if (e.src == n && e.tag == taken) set(ei, EdgeStatus::Act);
            break;
          case EdgeKind::F:
          case EdgeKind::D:
            if (a.count(e.src) || r_taken.count(e.src)) {
              // The producer writes again inside the opened window, so a
              // consumer must normally wait for the fresh value. But when
              // the producer sits in the wrap-around part of the window
              // while the consumer runs in the first segment — a loop
              // entered mid-body — the consumer reads the value already
              // delivered, and the producer must instead hold its write
              // back until that read happens. A read still owed from an
              // earlier commit is preserved for the same reason: the
              // producer stays blocked until the consumer catches up.
              if (consumer_first(e.src, e.dst))
                set(ei, EdgeStatus::Act);
              else if (a.count(e.src) &&
                       out.econf[ei] != EdgeStatus::Act)
                set(ei, EdgeStatus::Unchk);
            }
            if (b.count(e.src)) set(ei, EdgeStatus::Chk);
            // A descheduled consumer will not pay off an owed read, so a
            // producer waiting on it is freed.
            if (b.count(e.dst) && out.econf[ei] == EdgeStatus::Act)
              set(ei, EdgeStatus::Chk);
            break;
          case EdgeKind::L:
            if (g_taken.count(e.src) || r_taken.count(e.src)) {
              // When the producer runs before the consumer in the opened
              // window there is no pending read to protect; instead the
              // consumer must wait for the fresh value, so the edge goes
              // to act (the consumer may not even have run yet when a
              // loop is entered mid-body). This holds even for a consumer
              // outside the window — the commit decides which of the two
              // goes first — except when the consumer precedes the test in
              // straight-line order: then its pending read was owed before
              // the commit and remains so.
              auto fr = fwd_reach_.find(e.dst);
              bool owed_before = !a.count(e.dst) &&
                                 fr != fwd_reach_.end() &&
                                 fr->second.count(n) > 0;
              if (producer_first(e.src, e.dst) && !owed_before)
                set(ei, EdgeStatus::Act);
              else if (a.count(e.dst))
                set(ei, EdgeStatus::Unchk);
            }
            // A descheduled producer must wait only for consumers that
            // actually consume within the committed window, i.e. members
            // of the taken region. Tests of n's own control cycle consume
            // at their next-pass turn, after producers scheduled ahead.
            // A consumer awaiting a push that will now never come is
            // released.
            if (b.count(e.src)) {
              if (r_taken.count(e.dst))
                set(ei, EdgeStatus::Unchk);
              else if (out.econf[ei] == EdgeStatus::Act)
                set(ei, EdgeStatus::Chk);
            }
            if (b.count(e.dst) && !b.count(e.src)) set(ei, EdgeStatus::Chk);
            break;
        }
      }
      break;
    }
  }
}

PdgState PdgMachine::step(const PdgState& s, NodeId n) const {
  if (!executable(s, n))
    throw std::invalid_argument("node " + node_name(n) +
                                " is not executable in this state");
  PdgState out = s;
  apply_udav(out, s, n);
  apply_udec(out, s, n);
  return out;
}

PdgRun PdgMachine::run(const Store& init, Strategy strategy, uint64_t seed,
                       int bound) const {
  if (bound < 1) throw std::invalid_argument("bound must be >= 1");
  PdgRun run;
  PdgState s = init_state(init);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < bound; i++) {
    std::vector<NodeId> next = next_nodes(s);
    if (next.empty()) {
      run.verdict = PdgRun::Verdict::Quiescent;
      run.final_state = std::move(s);
      if (run.ret_executed)
        run.returned_final =
            avail_value(run.final_state, ret_node_, ret_var_);
      return run;
    }
    NodeId n = next[0];
    if (strategy == Strategy::SeededRandom && next.size() > 1)
      n = next[std::uniform_int_distribution<size_t>(0, next.size() - 1)(rng)];
    try {
      PdgState after = step(s, n);
      run.executed.push_back(n);
      if (n == ret_node_) {
        run.ret_executed = true;
        run.returned = avail_value(s, ret_node_, ret_var_);
      }
      s = std::move(after);
    } catch (const EvalError& err) {
      run.verdict = PdgRun::Verdict::RuntimeError;
      run.error = err.what();
      run.final_state = std::move(s);
      return run;
    }
  }
  run.verdict = PdgRun::Verdict::BoundExceeded;
  run.final_state = std::move(s);
  return run;
}

GuidedResult guided_run(const PdgMachine& m, const Store& init,
                        const CfgTrace& trace) {
  GuidedResult res;
  PdgState s = m.init_state(init);
  for (size_t i = 0; i < trace.steps.size(); i++) {
    NodeId n = trace.steps[i].node;
    if (!m.executable(s, n)) {
      res.fail_index = i;
      res.reason = "node " + node_name(n) + " not executable at step " +
                   std::to_string(i);
      res.run.final_state = std::move(s);
      return res;
    }
    const auto& stmt = m.pdg().statements.at(n);
    for (const auto& v : stmt.uses()) {
      Value want = trace.steps[i].before.at(v);
      Value got = m.avail_value(s, n, v);
      if (want != got) {
        res.fail_index = i;
        res.reason = "store/avail mismatch at step " + std::to_string(i) +
                     " node " + node_name(n) + " variable " + v + ": store " +
                     to_string(want) + ", avail " + to_string(got);
        res.run.final_state = std::move(s);
        return res;
      }
    }
    try {
      PdgState after = m.step(s, n);
      res.run.executed.push_back(n);
      if (n == m.ret_node()) {
        res.run.ret_executed = true;
        res.run.returned = m.avail_value(s, n, m.ret_var());
      }
      s = std::move(after);
    } catch (const EvalError& err) {
      res.fail_index = i;
      res.reason = std::string("evaluation error at step ") +
                   std::to_string(i) + ": " + err.what();
      res.run.verdict = PdgRun::Verdict::RuntimeError;
      res.run.error = err.what();
      res.run.final_state = std::move(s);
      return res;
    }
  }
  res.ok = true;
  res.run.final_state = std::move(s);
  if (res.run.ret_executed)
    res.run.returned_final =
        m.avail_value(res.run.final_state, m.ret_node(), m.ret_var());
  return res;
}

}  // namespace pdgsem
