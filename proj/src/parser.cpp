#include <cctype>
#include <sstream>

#include "pdgsem/cfg.hpp"

namespace pdgsem {

ParseError::ParseError(int line, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ": " + msg),
      line(line) {}

namespace {

// Cursor over a single line; expressions never span lines.
struct Scanner {
  const std::string& s;
  size_t pos = 0;
  int line;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) pos++;
  }
  bool done() {
    skip_ws();
    return pos >= s.size();
  }
  bool try_eat(const std::string& tok) {
    skip_ws();
    if (s.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }
  void expect(const std::string& tok) {
    if (!try_eat(tok))
      throw ParseError(line, "expected '" + tok + "' at column " +
                                 std::to_string(pos + 1));
  }
  bool peek_ident_char() {
    skip_ws();
    return pos < s.size() && (std::isalpha((unsigned char)s[pos]) || s[pos] == '_');
  }
  std::string ident() {
    skip_ws();
    if (!peek_ident_char())
      throw ParseError(line, "expected identifier at column " +
                                 std::to_string(pos + 1));
    size_t begin = pos;
    while (pos < s.size() &&
           (std::isalnum((unsigned char)s[pos]) || s[pos] == '_'))
      pos++;
    return s.substr(begin, pos - begin);
  }
  int64_t integer() {
    skip_ws();
    size_t begin = pos;
    if (pos < s.size() && s[pos] == '-') pos++;
    if (pos >= s.size() || !std::isdigit((unsigned char)s[pos]))
      throw ParseError(line, "expected integer at column " +
                                 std::to_string(pos + 1));
    while (pos < s.size() && std::isdigit((unsigned char)s[pos])) pos++;
    try {
      return std::stoll(s.substr(begin, pos - begin));
    } catch (const std::out_of_range&) {
      throw ParseError(line, "integer literal out of range");
    }
  }
  bool peek_digit() {
    skip_ws();
    return pos < s.size() && std::isdigit((unsigned char)s[pos]);
  }
};

ExprPtr parse_expr(Scanner& sc);

ExprPtr parse_atom(Scanner& sc) {
  if (sc.try_eat("(")) {
    ExprPtr e = parse_expr(sc);
    sc.expect(")");
    return e;
  }
  sc.skip_ws();
  if (sc.peek_digit() ||
      (sc.pos + 1 < sc.s.size() && sc.s[sc.pos] == '-' &&
       std::isdigit((unsigned char)sc.s[sc.pos + 1])))
    return Expr::int_lit(sc.integer());
  std::string id = sc.ident();
  if (id == "T") return Expr::truth_lit(true);
  if (id == "F") return Expr::truth_lit(false);
  return Expr::variable(id);
}

ExprPtr parse_term(Scanner& sc) {
  ExprPtr e = parse_atom(sc);
  while (sc.try_eat("*")) e = Expr::binary(BinOp::Mul, e, parse_atom(sc));
  return e;
}

ExprPtr parse_arith(Scanner& sc) {
  ExprPtr e = parse_term(sc);
  for (;;) {
    if (sc.try_eat("+"))
      e = Expr::binary(BinOp::Add, e, parse_term(sc));
    // "->" must not be eaten as a minus; edges are parsed elsewhere, but
    // keep the scanner honest anyway.
    else if (sc.try_eat("-"))
      e = Expr::binary(BinOp::Sub, e, parse_term(sc));
    else
      return e;
  }
}

ExprPtr parse_expr(Scanner& sc) {
  ExprPtr e = parse_arith(sc);
  BinOp op;
  if (sc.try_eat("=="))
    op = BinOp::Eq;
  else if (sc.try_eat("!="))
    op = BinOp::Ne;
  else if (sc.try_eat("<="))
    op = BinOp::Le;
  else if (sc.try_eat(">="))
    op = BinOp::Ge;
  else if (sc.try_eat("<"))
    op = BinOp::Lt;
  else if (sc.try_eat(">"))
    op = BinOp::Gt;
  else
    return e;
  return Expr::binary(op, e, parse_arith(sc));
}

Statement parse_statement(Scanner& sc) {
  sc.skip_ws();
  // "if" and "ret" are keywords; anything else starts an assignment.
  size_t save = sc.pos;
  if (sc.peek_ident_char()) {
    std::string id = sc.ident();
    if (id == "if") {
      Statement st = Statement::branch(parse_expr(sc));
      if (!sc.done()) throw ParseError(sc.line, "trailing input after statement");
      return st;
    }
    if (id == "ret") {
      Statement st = Statement::ret(sc.ident());
      if (!sc.done()) throw ParseError(sc.line, "trailing input after statement");
      return st;
    }
    sc.pos = save;
  }
  std::string target = sc.ident();
  sc.expect(":=");
  Statement st = Statement::assign(target, parse_expr(sc));
  if (!sc.done()) throw ParseError(sc.line, "trailing input after statement");
  return st;
}

}  // namespace

Cfg parse_cfg(const std::string& text) {
  Cfg cfg;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    lineno++;
    if (auto hash = raw.find('#'); hash != std::string::npos)
      raw = raw.substr(0, hash);
    Scanner sc{raw, 0, lineno};
    if (sc.done()) continue;

    if (sc.try_eat("node")) {
      int64_t id = sc.integer();
      if (id < 0 || id > 1'000'000)
        throw ParseError(lineno, "node id out of range");
      sc.expect(":");
      if (cfg.nodes.count((NodeId)id))
        throw ParseError(lineno, "duplicate node id " + std::to_string(id));
      cfg.nodes.emplace((NodeId)id, parse_statement(sc));
    } else if (sc.try_eat("edge")) {
      int64_t src = sc.integer();
      EdgeLabel label;
      if (sc.try_eat("-T->"))
        label = EdgeLabel::T;
      else if (sc.try_eat("-F->"))
        label = EdgeLabel::F;
      else if (sc.try_eat("->"))
        label = EdgeLabel::None;
      else
        throw ParseError(lineno, "expected '->', '-T->' or '-F->'");
      int64_t dst = sc.integer();
      if (!sc.done()) throw ParseError(lineno, "trailing input after edge");
      cfg.edges.push_back({(NodeId)src, (NodeId)dst, label});
    } else {
      throw ParseError(lineno, "expected 'node' or 'edge'");
    }
  }

  for (const auto& e : cfg.edges) {
    if (!cfg.nodes.count(e.src))
      throw ParseError(0, "edge references unknown node " + node_name(e.src));
    if (!cfg.nodes.count(e.dst))
      throw ParseError(0, "edge references unknown node " + node_name(e.dst));
  }

  // Start is the unique node without predecessors.
  std::set<NodeId> has_pred;
  for (const auto& e : cfg.edges) has_pred.insert(e.dst);
  std::vector<NodeId> candidates;
  for (const auto& [id, stmt] : cfg.nodes)
    if (!has_pred.count(id)) candidates.push_back(id);
  if (candidates.empty())
    throw ParseError(0, "missing start: every node has a predecessor");
  if (candidates.size() > 1) {
    std::string msg = "ambiguous start: nodes";
    for (NodeId n : candidates) msg += " " + node_name(n);
    msg += " all lack predecessors";
    throw ParseError(0, msg);
  }
  cfg.start = candidates[0];
  cfg.sort_edges();

  auto report = validate_cfg(cfg);
  if (!report.empty()) {
    std::string msg = "invalid cfg:";
    for (const auto& r : report) msg += "\n  " + r;
    throw ParseError(0, msg);
  }
  return cfg;
}

std::string print_cfg(const Cfg& cfg) {
  std::string out;
  for (const auto& [id, stmt] : cfg.nodes)
    out += "node " + std::to_string(id) + ": " + to_string(stmt) + "\n";
  std::vector<CfgEdge> edges = cfg.edges;
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) {
    const char* arrow = e.label == EdgeLabel::T   ? " -T-> "
                        : e.label == EdgeLabel::F ? " -F-> "
                                                  : " -> ";
    out += "edge " + std::to_string(e.src) + arrow + std::to_string(e.dst) + "\n";
  }
  return out;
}

Store parse_store(const std::string& text) {
  Store store;
  std::string item;
  auto flush = [&](const std::string& binding) {
    if (binding.find_first_not_of(" \t\r\n") == std::string::npos) return;
    auto eq = binding.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("store binding '" + binding +
                                  "' is not IDENT=VALUE");
    std::string name = binding.substr(0, eq);
    std::string val = binding.substr(eq + 1);
    auto trim = [](std::string& s) {
      size_t a = s.find_first_not_of(" \t\r\n");
      size_t b = s.find_last_not_of(" \t\r\n");
      s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
    };
    trim(name);
    trim(val);
    if (name.empty() || val.empty())
      throw std::invalid_argument("store binding '" + binding +
                                  "' is not IDENT=VALUE");
    Value v;
    if (val == "T")
      v = Value::truth(true);
    else if (val == "F")
      v = Value::truth(false);
    else
      v = Value::integer(std::stoll(val));
    if (!store.emplace(name, v).second)
      throw std::invalid_argument("duplicate store binding for '" + name + "'");
  };
  for (char c : text) {
    if (c == ',' || c == '\n') {
      flush(item);
      item.clear();
    } else {
      item += c;
    }
  }
  flush(item);
  return store;
}

std::string print_store(const Store& s) {
  std::string out;
  for (const auto& [name, v] : s) {
    if (!out.empty()) out += ",";
    out += name + "=" + to_string(v);
  }
  return out;
}

}  // namespace pdgsem
