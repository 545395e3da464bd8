#include "sqc/expr.hpp"

#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <optional>

#include "sqc/errors.hpp"

namespace sqc {

namespace {

struct FunctionInfo {
  std::string_view name;
  Function fn;
  std::size_t arity;
};

constexpr std::array<FunctionInfo, 9> kFunctions{{
    {"sin", Function::Sin, 1},
    {"cos", Function::Cos, 1},
    {"exp", Function::Exp, 1},
    {"log", Function::Log, 1},
    {"sqrt", Function::Sqrt, 1},
    {"abs", Function::Abs, 1},
    {"min", Function::Min, 2},
    {"max", Function::Max, 2},
    {"pow", Function::Pow, 2},
}};

std::optional<FunctionInfo> lookup_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return f;
  return std::nullopt;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string_view function_name(Function fn) {
  for (const auto& f : kFunctions)
    if (f.fn == fn) return f.name;
  return "?";
}

std::size_t function_arity(Function fn) {
  for (const auto& f : kFunctions)
    if (f.fn == fn) return f.arity;
  return 0;
}

// ---------------------------------------------------------------------------
// Tokenizer

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      while (i < src.size() && is_digit(src[i])) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && is_digit(src[i])) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j >= src.size() || !is_digit(src[j])) throw ParseError("malformed exponent", j);
        while (j < src.size() && is_digit(src[j])) ++j;
        i = j;
      }
      out.push_back({Token::Kind::Number, std::string(src.substr(start, i - start)), start});
    } else if (is_ident_start(c)) {
      while (i < src.size() && is_ident_char(src[i])) ++i;
      out.push_back({Token::Kind::Identifier, std::string(src.substr(start, i - start)), start});
    } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      out.push_back({Token::Kind::Operator, std::string(1, c), start});
      ++i;
    } else if (c == '(') {
      out.push_back({Token::Kind::LParen, "(", start});
      ++i;
    } else if (c == ')') {
      out.push_back({Token::Kind::RParen, ")", start});
      ++i;
    } else if (c == ',') {
      out.push_back({Token::Kind::Comma, ",", start});
      ++i;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
  }
  out.push_back({Token::Kind::End, "", src.size()});
  return out;
}

// ---------------------------------------------------------------------------
// Tree construction

Expr Expr::constant(double v, std::size_t pos) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Constant;
  n->value = v;
  n->position = pos;
  return Expr(std::move(n));
}

Expr Expr::variable(std::size_t index, std::size_t pos) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Variable;
  n->index = index;
  n->position = pos;
  return Expr(std::move(n));
}

Expr Expr::negate(const Expr& e, std::size_t pos) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Negate;
  n->args = {e.root()};
  n->position = pos;
  return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, const Expr& l, const Expr& r, std::size_t pos) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Binary;
  n->op = op;
  n->args = {l.root(), r.root()};
  n->position = pos;
  return Expr(std::move(n));
}

Expr Expr::call(Function fn, std::vector<Expr> args, std::size_t pos) {
  if (args.size() != function_arity(fn))
    throw UsageError("arity mismatch for " + std::string(function_name(fn)));
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Call;
  n->fn = fn;
  for (auto& a : args) n->args.push_back(a.root());
  n->position = pos;
  return Expr(std::move(n));
}

namespace {

std::size_t max_var(const Node& n) {
  std::size_t m = n.kind == NodeKind::Variable ? n.index : 0;
  for (const auto& a : n.args) m = std::max(m, max_var(*a));
  return m;
}

bool equal_nodes(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case NodeKind::Constant:
      if (a.value != b.value) return false;
      break;
    case NodeKind::Variable:
      if (a.index != b.index) return false;
      break;
    case NodeKind::Binary:
      if (a.op != b.op) return false;
      break;
    case NodeKind::Call:
      if (a.fn != b.fn) return false;
      break;
    case NodeKind::Negate:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal_nodes(*a.args[i], *b.args[i])) return false;
  return true;
}

}  // namespace

std::size_t Expr::max_variable() const { return root_ ? max_var(*root_) : 0; }

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.empty() || b.empty()) return a.empty() == b.empty();
  return equal_nodes(a.node(), b.node());
}

// ---------------------------------------------------------------------------
// Recursive-descent parser

namespace {

class Parser {
 public:
  Parser(std::vector<Token> toks, std::size_t dim) : toks_(std::move(toks)), dim_(dim) {}

  Expr parse_all() {
    if (peek().kind == Token::Kind::End) throw ParseError("empty expression", peek().position);
    Expr e = expr();
    if (peek().kind != Token::Kind::End) {
      if (peek().kind == Token::Kind::RParen) throw ParseError("unmatched ')'", peek().position);
      throw ParseError("unexpected token '" + peek().text + "'", peek().position);
    }
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool at_op(char c) const {
    return peek().kind == Token::Kind::Operator && peek().text[0] == c;
  }

  Expr expr() {
    Expr lhs = term();
    while (at_op('+') || at_op('-')) {
      const Token& t = next();
      Expr rhs = term();
      lhs = Expr::binary(t.text[0] == '+' ? BinaryOp::Add : BinaryOp::Sub, lhs, rhs, t.position);
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = power();
    while (at_op('*') || at_op('/')) {
      const Token& t = next();
      Expr rhs = power();
      lhs = Expr::binary(t.text[0] == '*' ? BinaryOp::Mul : BinaryOp::Div, lhs, rhs, t.position);
    }
    return lhs;
  }

  Expr power() {
    Expr base = unary();
    if (at_op('^')) {
      const Token& t = next();
      Expr exponent = power();
      return Expr::binary(BinaryOp::Pow, base, exponent, t.position);
    }
    return base;
  }

  Expr unary() {
    if (at_op('-')) {
      const Token& t = next();
      return Expr::negate(unary(), t.position);
    }
    return primary();
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Token::Kind::Number: {
        next();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size() || !std::isfinite(v))
          throw ParseError("invalid number '" + t.text + "'", t.position);
        return Expr::constant(v, t.position);
      }
      case Token::Kind::Identifier:
        next();
        if (peek().kind == Token::Kind::LParen) return call(t);
        return variable(t);
      case Token::Kind::LParen: {
        next();
        Expr inner = expr();
        expect_close();
        return inner;
      }
      case Token::Kind::End:
        throw ParseError("unexpected end of expression", t.position);
      default:
        throw ParseError("unexpected token '" + t.text + "'", t.position);
    }
  }

  Expr variable(const Token& t) {
    const std::string& s = t.text;
    if (s.size() >= 2 && s[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < s.size(); ++i) digits = digits && is_digit(s[i]);
      if (digits && s[1] != '0') {
        std::size_t idx = 0;
        auto [ptr, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), idx);
        if (ec != std::errc() || idx > dim_)
          throw ParseError("variable index exceeds dimension " + std::to_string(dim_) + " in '" +
                               s + "'",
                           t.position);
        return Expr::variable(idx, t.position);
      }
    }
    if (lookup_function(s)) throw ParseError("function '" + s + "' requires arguments", t.position);
    throw ParseError("unknown identifier '" + s + "'", t.position);
  }

  Expr call(const Token& name) {
    auto info = lookup_function(name.text);
    if (!info) throw ParseError("unknown function '" + name.text + "'", name.position);
    next();  // '('
    std::vector<Expr> args;
    args.push_back(expr());
    while (peek().kind == Token::Kind::Comma) {
      next();
      args.push_back(expr());
    }
    expect_close();
    if (args.size() != info->arity)
      throw ParseError("function '" + name.text + "' expects " + std::to_string(info->arity) +
                           " argument(s), got " + std::to_string(args.size()),
                       name.position);
    return Expr::call(info->fn, std::move(args), name.position);
  }

  void expect_close() {
    if (peek().kind == Token::Kind::RParen) {
      next();
      return;
    }
    if (peek().kind == Token::Kind::End) throw ParseError("unclosed parenthesis", peek().position);
    throw ParseError("expected ')' but found '" + peek().text + "'", peek().position);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t dim_;
};

}  // namespace

Expr parse(std::string_view source, std::size_t dimension) {
  if (dimension == 0) throw UsageError("dimension must be at least 1");
  return Parser(tokenize(source), dimension).parse_all();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Constant:
      if (n.value < 0 || std::signbit(n.value)) {
        out += "(-" + format_number(-n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      return;
    case NodeKind::Variable:
      out += "x" + std::to_string(n.index);
      return;
    case NodeKind::Negate:
      out += "(-";
      print_node(*n.args[0], out);
      out += ")";
      return;
    case NodeKind::Binary: {
      static constexpr std::array<const char*, 5> ops{" + ", " - ", " * ", " / ", " ^ "};
      out += "(";
      print_node(*n.args[0], out);
      out += ops[static_cast<std::size_t>(n.op)];
      print_node(*n.args[1], out);
      out += ")";
      return;
    }
    case NodeKind::Call:
      out += function_name(n.fn);
      out += "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print_node(*n.args[i], out);
      }
      out += ")";
      return;
  }
}

}  // namespace

std::string pretty_print(const Expr& e) {
  std::string out;
  if (!e.empty()) print_node(e.node(), out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation. One generic walker serves both plain values and dual numbers.

namespace {

struct Dual {
  double v;
  double d;
};

struct EvalContext {
  const Vec& x;
  const Vec* dir;  // null for plain evaluation
  bool kink = false;
};

double val(double a) { return a; }
double val(const Dual& a) { return a.v; }

template <class T>
T lift(double c);
template <>
double lift<double>(double c) {
  return c;
}
template <>
Dual lift<Dual>(double c) {
  return {c, 0.0};
}

[[noreturn]] void domain_error(const std::string& what, const Node& n) {
  throw EvalError(what + " at offset " + std::to_string(n.position), n.position);
}

template <class T>
T checked(T r, const Node& n) {
  if constexpr (std::is_same_v<T, Dual>) {
    if (!std::isfinite(r.v) || !std::isfinite(r.d)) domain_error("non-finite result", n);
  } else {
    if (!std::isfinite(r)) domain_error("non-finite result", n);
  }
  return r;
}

bool is_integer_constant(const Node& n) {
  return n.kind == NodeKind::Constant && std::nearbyint(n.value) == n.value &&
         std::abs(n.value) < 1e9;
}

template <class T>
T eval_node(const Node& n, EvalContext& ctx);

template <class T>
T eval_binary(const Node& n, EvalContext& ctx) {
  const Node& rn = *n.args[1];
  if (n.op == BinaryOp::Pow && is_integer_constant(rn)) {
    const T a = eval_node<T>(*n.args[0], ctx);
    const double k = rn.value;
    if (val(a) == 0.0 && k < 0) domain_error("division by zero in negative power", n);
    const double p = std::pow(val(a), k);
    if constexpr (std::is_same_v<T, Dual>) {
      const double dp = k == 0.0 ? 0.0 : k * std::pow(a.v, k - 1.0) * a.d;
      return checked(Dual{p, dp}, n);
    } else {
      return checked(p, n);
    }
  }
  const T a = eval_node<T>(*n.args[0], ctx);
  const T b = eval_node<T>(rn, ctx);
  if constexpr (std::is_same_v<T, Dual>) {
    switch (n.op) {
      case BinaryOp::Add: return checked(Dual{a.v + b.v, a.d + b.d}, n);
      case BinaryOp::Sub: return checked(Dual{a.v - b.v, a.d - b.d}, n);
      case BinaryOp::Mul: return checked(Dual{a.v * b.v, a.d * b.v + a.v * b.d}, n);
      case BinaryOp::Div:
        if (b.v == 0.0) domain_error("division by zero", n);
        return checked(Dual{a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}, n);
      case BinaryOp::Pow: {
        if (a.v <= 0.0) domain_error("non-positive base with non-integer exponent", n);
        const double p = std::pow(a.v, b.v);
        return checked(Dual{p, p * (b.d * std::log(a.v) + b.v * a.d / a.v)}, n);
      }
    }
  } else {
    switch (n.op) {
      case BinaryOp::Add: return checked(a + b, n);
      case BinaryOp::Sub: return checked(a - b, n);
      case BinaryOp::Mul: return checked(a * b, n);
      case BinaryOp::Div:
        if (b == 0.0) domain_error("division by zero", n);
        return checked(a / b, n);
      case BinaryOp::Pow:
        if (a <= 0.0) domain_error("non-positive base with non-integer exponent", n);
        return checked(std::pow(a, b), n);
    }
  }
  domain_error("unknown operator", n);
}

template <class T>
T eval_call(const Node& n, EvalContext& ctx) {
  const T a = eval_node<T>(*n.args[0], ctx);
  const double av = val(a);
  if (n.fn == Function::Min || n.fn == Function::Max || n.fn == Function::Pow) {
    const T b = eval_node<T>(*n.args[1], ctx);
    const double bv = val(b);
    if (n.fn == Function::Pow) {
      if (av <= 0.0) domain_error("pow requires a positive base", n);
      if constexpr (std::is_same_v<T, Dual>) {
        const double p = std::pow(a.v, b.v);
        return checked(Dual{p, p * (b.d * std::log(a.v) + b.v * a.d / a.v)}, n);
      } else {
        return checked(std::pow(a, b), n);
      }
    }
    if (av == bv) {
      ctx.kink = true;
      return a;
    }
    const bool pick_a = n.fn == Function::Min ? av < bv : av > bv;
    return pick_a ? a : b;
  }
  switch (n.fn) {
    case Function::Sin:
      if constexpr (std::is_same_v<T, Dual>) return checked(Dual{std::sin(av), std::cos(av) * a.d}, n);
      else return checked(std::sin(av), n);
    case Function::Cos:
      if constexpr (std::is_same_v<T, Dual>) return checked(Dual{std::cos(av), -std::sin(av) * a.d}, n);
      else return checked(std::cos(av), n);
    case Function::Exp: {
      const double e = std::exp(av);
      if constexpr (std::is_same_v<T, Dual>) return checked(Dual{e, e * a.d}, n);
      else return checked(e, n);
    }
    case Function::Log:
      if (av <= 0.0) domain_error("log of non-positive value", n);
      if constexpr (std::is_same_v<T, Dual>) return checked(Dual{std::log(av), a.d / av}, n);
      else return checked(std::log(av), n);
    case Function::Sqrt: {
      if (av < 0.0) domain_error("sqrt of negative value", n);
      const double s = std::sqrt(av);
      if constexpr (std::is_same_v<T, Dual>) {
        if (s == 0.0) domain_error("sqrt not differentiable at zero", n);
        return checked(Dual{s, a.d / (2.0 * s)}, n);
      } else {
        return checked(s, n);
      }
    }
    case Function::Abs:
      if (av == 0.0) {
        ctx.kink = true;
        return a;
      }
      if (av > 0.0) return a;
      if constexpr (std::is_same_v<T, Dual>) return Dual{-a.v, -a.d};
      else return -a;
    default:
      break;
  }
  domain_error("unknown function", n);
}

template <class T>
T eval_node(const Node& n, EvalContext& ctx) {
  switch (n.kind) {
    case NodeKind::Constant:
      return lift<T>(n.value);
    case NodeKind::Variable: {
      if (n.index == 0 || n.index > ctx.x.size())
        throw UsageError("variable x" + std::to_string(n.index) + " outside point dimension " +
                         std::to_string(ctx.x.size()));
      if constexpr (std::is_same_v<T, Dual>) return Dual{ctx.x[n.index - 1], (*ctx.dir)[n.index - 1]};
      else return ctx.x[n.index - 1];
    }
    case NodeKind::Negate: {
      const T a = eval_node<T>(*n.args[0], ctx);
      if constexpr (std::is_same_v<T, Dual>) return Dual{-a.v, -a.d};
      else return -a;
    }
    case NodeKind::Binary:
      return eval_binary<T>(n, ctx);
    case NodeKind::Call:
      return eval_call<T>(n, ctx);
  }
  domain_error("corrupt node", n);
}

}  // namespace

double eval_expr(const Expr& e, const Vec& x) {
  if (e.empty()) throw UsageError("empty expression");
  EvalContext ctx{x, nullptr};
  return eval_node<double>(e.node(), ctx);
}

DualResult eval_dual(const Expr& e, const Vec& x, const Vec& d) {
  if (e.empty()) throw UsageError("empty expression");
  require_same_dim(x, d);
  EvalContext ctx{x, &d};
  const Dual r = eval_node<Dual>(e.node(), ctx);
  return {r.v, r.d, ctx.kink};
}

}  // namespace sqc
