#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sqc/vecmath.hpp"

namespace sqc {

// Expression language for user-defined scalar functions.
//
//   expr    := term (('+' | '-') term)*
//   term    := power (('*' | '/') power)*
//   power   := unary ('^' power)?            right-associative
//   unary   := '-' unary | primary           binds tighter than '^'
//   primary := number | 'x' INDEX | NAME '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos exp log sqrt abs (one argument), min max pow (two).
// Variables are x1..xn. There is no implicit multiplication.

struct Token {
  enum class Kind { Number, Identifier, Operator, LParen, RParen, Comma, End };
  Kind kind;
  std::string text;
  std::size_t position;
};

std::vector<Token> tokenize(std::string_view source);

enum class NodeKind { Constant, Variable, Negate, Binary, Call };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Sin, Cos, Exp, Log, Sqrt, Abs, Min, Max, Pow };

std::string_view function_name(Function fn);
std::size_t function_arity(Function fn);

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;         // Constant
  std::size_t index = 0;      // Variable, 1-based
  BinaryOp op = BinaryOp::Add;  // Binary
  Function fn = Function::Sin;  // Call
  std::vector<NodePtr> args;  // operands, in source order
  std::size_t position = 0;   // source offset; 0 for synthesized nodes
};

/// Immutable expression tree. Copies share structure.
class Expr {
 public:
  Expr() = default;
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  static Expr constant(double v, std::size_t pos = 0);
  static Expr variable(std::size_t index, std::size_t pos = 0);
  static Expr negate(const Expr& e, std::size_t pos = 0);
  static Expr binary(BinaryOp op, const Expr& l, const Expr& r, std::size_t pos = 0);
  static Expr call(Function fn, std::vector<Expr> args, std::size_t pos = 0);

  const Node& node() const { return *root_; }
  const NodePtr& root() const { return root_; }
  bool empty() const { return !root_; }

  /// Largest variable index used (0 for a closed expression).
  std::size_t max_variable() const;

 private:
  NodePtr root_;
};

/// Structural equality; source positions are ignored.
bool structurally_equal(const Expr& a, const Expr& b);

Expr parse(std::string_view source, std::size_t dimension);

/// Fully parenthesized text that reparses to a structurally equal tree.
std::string pretty_print(const Expr& e);

double eval_expr(const Expr& e, const Vec& x);

struct DualResult {
  double value = 0.0;
  double dderiv = 0.0;              // <grad f(x), d>
  bool nondifferentiable = false;   // abs/min/max evaluated exactly at a kink
};

/// Value and directional derivative along `d` by forward-mode propagation.
DualResult eval_dual(const Expr& e, const Vec& x, const Vec& d);

}  // namespace sqc
