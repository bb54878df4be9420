#include "canon4/expr.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <numbers>
#include <utility>

namespace canon4 {

namespace {

NodePtr make_leaf(Op op, double number = 0.0, std::string name = {}) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->number = number;
  n->name = std::move(name);
  return n;
}

NodePtr make_node(Op op, NodePtr lhs, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

struct FunctionName {
  std::string_view name;
  Op op;
};

constexpr FunctionName kFunctions[] = {
    {"sin", Op::Sin},   {"cos", Op::Cos}, {"sinh", Op::Sinh}, {"cosh", Op::Cosh}, {"tanh", Op::Tanh},
    {"exp", Op::Exp},   {"ln", Op::Ln},   {"sqrt", Op::Sqrt}, {"abs", Op::Abs},
};

const char* function_name(Op op) {
  for (const auto& f : kFunctions)
    if (f.op == op) return f.name.data();
  return nullptr;
}

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind = Tok::End;
  std::size_t offset = 0;
  std::string_view text;
  double number = 0.0;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Number: return "number";
    case Tok::Ident: return "identifier";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    Token t;
    t.offset = pos_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      t.kind = Tok::Ident;
      t.text = src_.substr(start, pos_ - start);
      return t;
    }
    ++pos_;
    switch (c) {
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '/': t.kind = Tok::Slash; break;
      case '^': t.kind = Tok::Caret; break;
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      default:
        throw SyntaxError(ErrorKind::Syntax, t.offset, std::string("unexpected character '") + c + "'");
    }
    return t;
  }

 private:
  Token number() {
    Token t;
    t.offset = pos_;
    std::size_t end = pos_;
    while (end < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.')) ++end;
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t exp = end + 1;
      if (exp < src_.size() && (src_[exp] == '+' || src_[exp] == '-')) ++exp;
      if (exp < src_.size() && std::isdigit(static_cast<unsigned char>(src_[exp]))) {
        end = exp;
        while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
      }
    }
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + end;
    auto [ptr, ec] = std::from_chars(first, last, t.number);
    if (ec != std::errc() || ptr != last) throw SyntaxError(ErrorKind::Syntax, t.offset, "malformed number");
    t.kind = Tok::Number;
    t.text = src_.substr(pos_, end - pos_);
    pos_ = end;
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// expr    := term (('+' | '-') term)*
// term    := unary (('*' | '/') unary)*
// unary   := '-' unary | power
// power   := primary ('^' exponent)*
// exponent:= '-' exponent | primary
// primary := number | 'u' | 'v' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { advance(); }

  NodePtr parse_all() {
    NodePtr n = expr();
    if (tok_.kind != Tok::End)
      throw SyntaxError(ErrorKind::Syntax, tok_.offset,
                        std::string("expected operator or end of input, found ") + describe(tok_.kind));
    return n;
  }

 private:
  void advance() { tok_ = lexer_.next(); }

  NodePtr expr() {
    NodePtr n = term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      Op op = tok_.kind == Tok::Plus ? Op::Add : Op::Sub;
      advance();
      n = make_node(op, n, term());
    }
    return n;
  }

  NodePtr term() {
    NodePtr n = unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      Op op = tok_.kind == Tok::Star ? Op::Mul : Op::Div;
      advance();
      n = make_node(op, n, unary());
    }
    return n;
  }

  NodePtr unary() {
    if (tok_.kind == Tok::Minus) {
      advance();
      return make_node(Op::Neg, unary());
    }
    return power();
  }

  NodePtr power() {
    NodePtr n = primary();
    while (tok_.kind == Tok::Caret) {
      advance();
      std::size_t at = tok_.offset;
      NodePtr ex = exponent();
      if (depends_on_uv(*ex))
        throw SyntaxError(ErrorKind::Syntax, at, "exponent must be a constant expression");
      n = make_node(Op::Pow, n, ex);
    }
    return n;
  }

  NodePtr exponent() {
    if (tok_.kind == Tok::Minus) {
      advance();
      return make_node(Op::Neg, exponent());
    }
    return primary();
  }

  NodePtr primary() {
    Token t = tok_;
    switch (t.kind) {
      case Tok::Number:
        advance();
        return make_leaf(Op::Number, t.number);
      case Tok::LParen: {
        advance();
        NodePtr n = expr();
        expect(Tok::RParen);
        return n;
      }
      case Tok::Ident:
        return identifier(t);
      default:
        throw SyntaxError(ErrorKind::Syntax, t.offset, std::string("expected operand, found ") + describe(t.kind));
    }
  }

  NodePtr identifier(const Token& t) {
    advance();
    if (t.text == "u") return make_leaf(Op::VarU);
    if (t.text == "v") return make_leaf(Op::VarV);
    if (t.text == "pi") return make_leaf(Op::Constant, std::numbers::pi, "pi");
    if (t.text == "e") return make_leaf(Op::Constant, std::numbers::e, "e");
    for (const auto& f : kFunctions) {
      if (t.text == f.name) {
        expect(Tok::LParen);
        NodePtr arg = expr();
        expect(Tok::RParen);
        return make_node(f.op, arg);
      }
    }
    throw SyntaxError(ErrorKind::UnknownIdentifier, t.offset, "unknown identifier '" + std::string(t.text) + "'");
  }

  void expect(Tok kind) {
    if (tok_.kind != kind)
      throw SyntaxError(ErrorKind::Syntax, tok_.offset,
                        std::string("expected ") + describe(kind) + ", found " + describe(tok_.kind));
    advance();
  }

  Lexer lexer_;
  Token tok_;
};

void write(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::Number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.number);
      if (n.number < 0.0) {
        out += "(-";
        std::snprintf(buf, sizeof buf, "%.17g", -n.number);
        out += buf;
        out += ')';
      } else {
        out += buf;
      }
      return;
    }
    case Op::Constant: out += n.name; return;
    case Op::VarU: out += 'u'; return;
    case Op::VarV: out += 'v'; return;
    case Op::Neg:
      out += "(-";
      write(*n.lhs, out);
      out += ')';
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow: {
      const char sym = n.op == Op::Add ? '+' : n.op == Op::Sub ? '-' : n.op == Op::Mul ? '*' : n.op == Op::Div ? '/' : '^';
      out += '(';
      write(*n.lhs, out);
      out += ' ';
      out += sym;
      out += ' ';
      write(*n.rhs, out);
      out += ')';
      return;
    }
    default:
      out += function_name(n.op);
      out += '(';
      write(*n.lhs, out);
      out += ')';
      return;
  }
}

bool equal_nodes(const Node& a, const Node& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::Number: return a.number == b.number;
    case Op::Constant: return a.name == b.name;
    case Op::VarU:
    case Op::VarV: return true;
    default: break;
  }
  if ((a.lhs == nullptr) != (b.lhs == nullptr) || (a.rhs == nullptr) != (b.rhs == nullptr)) return false;
  if (a.lhs && !equal_nodes(*a.lhs, *b.lhs)) return false;
  if (a.rhs && !equal_nodes(*a.rhs, *b.rhs)) return false;
  return true;
}

NodePtr substitute_node(const NodePtr& n, const NodePtr& u_by, const NodePtr& v_by) {
  switch (n->op) {
    case Op::VarU: return u_by;
    case Op::VarV: return v_by;
    case Op::Number:
    case Op::Constant: return n;
    default: break;
  }
  auto copy = std::make_shared<Node>(*n);
  if (n->lhs) copy->lhs = substitute_node(n->lhs, u_by, v_by);
  if (n->rhs && n->op != Op::Pow) copy->rhs = substitute_node(n->rhs, u_by, v_by);
  return copy;
}

}  // namespace

namespace detail {
void throw_domain(const char* what, double u, double v) {
  throw Error(ErrorKind::Domain, std::string("domain error: ") + what, Point2{u, v});
}
}  // namespace detail

Expression::Expression() : root_(make_leaf(Op::Number, 0.0)) {}
Expression::Expression(NodePtr root) : root_(std::move(root)) {}

Expression Expression::number(double c) {
  if (c < 0.0) return Expression(make_node(Op::Neg, make_leaf(Op::Number, -c)));
  return Expression(make_leaf(Op::Number, c));
}
Expression Expression::u() { return Expression(make_leaf(Op::VarU)); }
Expression Expression::v() { return Expression(make_leaf(Op::VarV)); }

Expression operator+(const Expression& a, const Expression& b) {
  return Expression(make_node(Op::Add, a.root_, b.root_));
}
Expression operator-(const Expression& a, const Expression& b) {
  return Expression(make_node(Op::Sub, a.root_, b.root_));
}
Expression operator*(const Expression& a, const Expression& b) {
  return Expression(make_node(Op::Mul, a.root_, b.root_));
}
Expression operator/(const Expression& a, const Expression& b) {
  return Expression(make_node(Op::Div, a.root_, b.root_));
}
Expression operator-(const Expression& a) { return Expression(make_node(Op::Neg, a.root_)); }

Expression parse(std::string_view source) {
  bool blank = true;
  for (char c : source)
    if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
  if (blank) throw SyntaxError(ErrorKind::Syntax, 0, "empty expression");
  return Expression(Parser(source).parse_all());
}

std::string to_string(const Expression& e) {
  std::string out;
  write(e.root(), out);
  return out;
}

bool structurally_equal(const Expression& a, const Expression& b) { return equal_nodes(a.root(), b.root()); }

bool depends_on_uv(const Node& n) {
  if (n.op == Op::VarU || n.op == Op::VarV) return true;
  if (n.lhs && depends_on_uv(*n.lhs)) return true;
  if (n.rhs && depends_on_uv(*n.rhs)) return true;
  return false;
}

Expression substitute(const Expression& e, const Expression& u_by, const Expression& v_by) {
  return Expression(substitute_node(e.root_ptr(), u_by.root_ptr(), v_by.root_ptr()));
}

double evaluate(const Expression& e, double u, double v) { return evaluate<double>(e, u, v); }

Jet3 eval_jet3(const Expression& e, double u, double v) {
  const D3 r = evaluate_seeded<D3>(e, u, v);
  Jet3 j;
  j.value = r.v.v.v;
  j.du = r.d[0].v.v;
  j.dv = r.d[1].v.v;
  j.duu = r.d[0].d[0].v;
  j.duv = r.d[0].d[1].v;
  j.dvv = r.d[1].d[1].v;
  j.duuu = r.d[0].d[0].d[0];
  j.duuv = r.d[0].d[0].d[1];
  j.duvv = r.d[0].d[1].d[1];
  j.dvvv = r.d[1].d[1].d[1];
  return j;
}

}  // namespace canon4
