#include "pdgsem/expr.hpp"

namespace pdgsem {

std::string to_string(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::True:
      return "T";
    case Value::Kind::False:
      return "F";
    case Value::Kind::Int:
      return std::to_string(v.as_int());
  }
  return "?";
}

bool is_comparison(BinOp op) {
  switch (op) {
    case BinOp::Add:
    case BinOp::Sub:
    case BinOp::Mul:
      return false;
    default:
      return true;
  }
}

const char* op_token(BinOp op) {
  switch (op) {
    case BinOp::Add:
      return "+";
    case BinOp::Sub:
      return "-";
    case BinOp::Mul:
      return "*";
    case BinOp::Eq:
      return "==";
    case BinOp::Ne:
      return "!=";
    case BinOp::Lt:
      return "<";
    case BinOp::Le:
      return "<=";
    case BinOp::Gt:
      return ">";
    case BinOp::Ge:
      return ">=";
  }
  return "?";
}

ExprPtr Expr::int_lit(int64_t v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::IntLit;
  e->int_value = v;
  return e;
}

ExprPtr Expr::truth_lit(bool b) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::TruthLit;
  e->truth_value = b;
  return e;
}

ExprPtr Expr::variable(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Var;
  e->var = std::move(name);
  return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

namespace {

int64_t require_int(const Value& v, const char* what) {
  if (!v.is_int()) {
    throw EvalError(std::string("type error: ") + what +
                    " applied to truth value");
  }
  return v.as_int();
}

Value eval_binary(BinOp op, const Value& a, const Value& b) {
  switch (op) {
    case BinOp::Add:
    case BinOp::Sub:
    case BinOp::Mul: {
      int64_t x = require_int(a, "arithmetic");
      int64_t y = require_int(b, "arithmetic");
      int64_t r = 0;
      bool ovf = false;
      switch (op) {
        case BinOp::Add:
          ovf = __builtin_add_overflow(x, y, &r);
          break;
        case BinOp::Sub:
          ovf = __builtin_sub_overflow(x, y, &r);
          break;
        default:
          ovf = __builtin_mul_overflow(x, y, &r);
          break;
      }
      if (ovf) throw EvalError("integer overflow");
      return Value::integer(r);
    }
    case BinOp::Eq:
    case BinOp::Ne: {
      if (a.is_truth() != b.is_truth()) {
        throw EvalError("type error: comparison between truth value and integer");
      }
      bool eq = a == b;
      return Value::truth(op == BinOp::Eq ? eq : !eq);
    }
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: {
      int64_t x = require_int(a, "ordered comparison");
      int64_t y = require_int(b, "ordered comparison");
      switch (op) {
        case BinOp::Lt:
          return Value::truth(x < y);
        case BinOp::Le:
          return Value::truth(x <= y);
        case BinOp::Gt:
          return Value::truth(x > y);
        default:
          return Value::truth(x >= y);
      }
    }
  }
  throw EvalError("unknown operator");
}

}  // namespace

Value eval_expr(const Expr& e, const VarEnv& env) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
      return Value::integer(e.int_value);
    case Expr::Kind::TruthLit:
      return Value::truth(e.truth_value);
    case Expr::Kind::Var:
      return env(e.var);
    case Expr::Kind::Binary:
      return eval_binary(e.op, eval_expr(*e.lhs, env), eval_expr(*e.rhs, env));
  }
  throw EvalError("malformed expression");
}

void collect_vars(const Expr& e, std::set<std::string>& out) {
  switch (e.kind) {
    case Expr::Kind::Var:
      out.insert(e.var);
      break;
    case Expr::Kind::Binary:
      collect_vars(*e.lhs, out);
      collect_vars(*e.rhs, out);
      break;
    default:
      break;
  }
}

std::set<std::string> vars(const Expr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

namespace {

// Precedence levels: 0 comparison, 1 additive, 2 multiplicative, 3 atom.
int precedence(const Expr& e) {
  if (e.kind != Expr::Kind::Binary) return 3;
  if (is_comparison(e.op)) return 0;
  return e.op == BinOp::Mul ? 2 : 1;
}

void print(const Expr& e, int min_prec, std::string& out) {
  int prec = precedence(e);
  bool paren = prec < min_prec;
  if (paren) out += "(";
  switch (e.kind) {
    case Expr::Kind::IntLit:
      out += std::to_string(e.int_value);
      break;
    case Expr::Kind::TruthLit:
      out += e.truth_value ? "T" : "F";
      break;
    case Expr::Kind::Var:
      out += e.var;
      break;
    case Expr::Kind::Binary:
      // Left-associative chains keep the left child at the same level and
      // require the right child to bind tighter. Comparisons do not
      // associate, so both operands must be arithmetic-level.
      print(*e.lhs, prec == 0 ? 1 : prec, out);
      out += " ";
      out += op_token(e.op);
      out += " ";
      print(*e.rhs, prec + 1, out);
      break;
  }
  if (paren) out += ")";
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, 0, out);
  return out;
}

}  // namespace pdgsem
