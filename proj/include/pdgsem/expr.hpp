#pragma once

#include <functional>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>

#include "pdgsem/value.hpp"

namespace pdgsem {

// Raised for dynamic evaluation failures: type errors, overflow, and
// non-truth branch conditions. Interpreters catch it and turn it into a
// run verdict.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BinOp : uint8_t { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge };

bool is_comparison(BinOp op);
const char* op_token(BinOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Expression AST. Nodes are immutable and freely shared between graphs.
struct Expr {
  enum class Kind : uint8_t { IntLit, TruthLit, Var, Binary };

  Kind kind;
  int64_t int_value = 0;     // IntLit
  bool truth_value = false;  // TruthLit
  std::string var;           // Var
  BinOp op = BinOp::Add;     // Binary
  ExprPtr lhs, rhs;          // Binary

  static ExprPtr int_lit(int64_t v);
  static ExprPtr truth_lit(bool b);
  static ExprPtr variable(std::string name);
  static ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r);
};

using VarEnv = std::function<Value(const std::string&)>;

// Standard arithmetic over 64-bit signed integers; comparisons yield T/F.
// Arithmetic on truth values, ordered comparison involving a truth value,
// mixed-kind (in)equality and signed overflow all raise EvalError.
Value eval_expr(const Expr& e, const VarEnv& env);

void collect_vars(const Expr& e, std::set<std::string>& out);
std::set<std::string> vars(const Expr& e);

// Canonical rendering with minimal parentheses; stable across round trips.
std::string to_string(const Expr& e);

}  // namespace pdgsem
