#include "osl/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace osl {

namespace {

constexpr int kMaxDepth = 200;

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

}  // namespace

class ExprParser {
 public:
  ExprParser(std::string_view src, int dimension) : src_(src), dim_(dimension) {}

  Expr run() {
    Expr e;
    nodes_ = &e.nodes_;
    args_ = &e.args_;
    skip_ws();
    if (pos_ >= src_.size()) throw parse_error("empty expression", pos_);
    e.root_ = parse_sum(0);
    skip_ws();
    if (pos_ < src_.size())
      throw parse_error(std::string("unexpected '") + src_[pos_] + "'", pos_);
    e.max_var_ = max_var_;
    return e;
  }

 private:
  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
  int max_var_ = 0;
  std::vector<Expr::Node>* nodes_ = nullptr;
  std::vector<int>* args_ = nullptr;

  void skip_ws() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
            src_[pos_] == '\r'))
      ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  int add_node(Expr::Node n) {
    nodes_->push_back(n);
    return static_cast<int>(nodes_->size()) - 1;
  }

  int parse_sum(int depth) {
    check_depth(depth);
    int lhs = parse_product(depth + 1);
    for (;;) {
      char c = peek();
      if (c != '+' && c != '-') return lhs;
      std::size_t at = pos_++;
      int rhs = parse_product(depth + 1);
      Expr::Node n;
      n.op = c == '+' ? ExprOp::Add : ExprOp::Sub;
      n.a = lhs;
      n.b = rhs;
      n.src_offset = static_cast<std::uint32_t>(at);
      lhs = add_node(n);
    }
  }

  int parse_product(int depth) {
    check_depth(depth);
    int lhs = parse_unary(depth + 1);
    for (;;) {
      char c = peek();
      if (c != '*' && c != '/') return lhs;
      std::size_t at = pos_++;
      int rhs = parse_unary(depth + 1);
      Expr::Node n;
      n.op = c == '*' ? ExprOp::Mul : ExprOp::Div;
      n.a = lhs;
      n.b = rhs;
      n.src_offset = static_cast<std::uint32_t>(at);
      lhs = add_node(n);
    }
  }

  int parse_unary(int depth) {
    check_depth(depth);
    if (peek() == '-') {
      std::size_t at = pos_++;
      int child = parse_unary(depth + 1);
      Expr::Node n;
      n.op = ExprOp::Neg;
      n.a = child;
      n.src_offset = static_cast<std::uint32_t>(at);
      return add_node(n);
    }
    return parse_power(depth + 1);
  }

  int parse_power(int depth) {
    check_depth(depth);
    int base = parse_atom(depth + 1);
    if (peek() != '^') return base;
    std::size_t at = pos_++;
    skip_ws();
    std::size_t exp_at = pos_;
    int exponent = parse_unary(depth + 1);
    if (references_variable(exponent))
      throw parse_error("exponent of '^' must be a constant expression", exp_at);
    Expr::Node n;
    n.op = ExprOp::Pow;
    n.a = base;
    n.b = exponent;
    n.src_offset = static_cast<std::uint32_t>(at);
    return add_node(n);
  }

  int parse_atom(int depth) {
    check_depth(depth);
    char c = peek();
    std::size_t at = pos_;
    if (c == '(') {
      ++pos_;
      int inner = parse_sum(depth + 1);
      if (peek() != ')') throw parse_error("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (is_digit(c)) return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    if (c == '\0') throw parse_error("unexpected end of input", pos_);
    throw parse_error(std::string("unexpected '") + c + "'", pos_);
    (void)at;
  }

  int parse_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      if (pos_ >= src_.size() || !is_digit(src_[pos_]))
        throw parse_error("malformed number: expected digit after '.'", pos_);
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ >= src_.size() || !is_digit(src_[pos_])) {
        pos_ = mark;  // "2e" is "2" followed by identifier start; reject below
        throw parse_error("malformed number: expected exponent digits", mark + 1);
      }
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    double value = 0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_)
      throw parse_error("malformed number", start);
    Expr::Node n;
    n.op = ExprOp::Constant;
    n.value = value;
    n.src_offset = static_cast<std::uint32_t>(start);
    return add_node(n);
  }

  int parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    std::string_view name = src_.substr(start, pos_ - start);

    if (name.size() >= 2 && name[0] == 'x' && is_digit(name[1])) {
      int idx = 0;
      auto res = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size()) {
        if (idx < 1)
          throw parse_error("variable index must be >= 1", start);
        if (idx > dim_)
          throw parse_error("variable x" + std::to_string(idx) +
                                " out of range (dimension " + std::to_string(dim_) + ")",
                            start);
        if (idx > max_var_) max_var_ = idx;
        Expr::Node n;
        n.op = ExprOp::Variable;
        n.var = idx;
        n.src_offset = static_cast<std::uint32_t>(start);
        return add_node(n);
      }
    }

    ExprOp op;
    int min_args = 1, max_args = 1;
    if (name == "sin") op = ExprOp::Sin;
    else if (name == "cos") op = ExprOp::Cos;
    else if (name == "exp") op = ExprOp::Exp;
    else if (name == "sqrt") op = ExprOp::Sqrt;
    else if (name == "abs") op = ExprOp::Abs;
    else if (name == "max") { op = ExprOp::Max; min_args = 2; max_args = 1 << 20; }
    else if (name == "min") { op = ExprOp::Min; min_args = 2; max_args = 1 << 20; }
    else throw parse_error("unknown identifier '" + std::string(name) + "'", start);

    if (peek() != '(')
      throw parse_error("expected '(' after '" + std::string(name) + "'", pos_);
    ++pos_;
    std::vector<int> children;
    children.push_back(parse_sum(1));
    while (peek() == ',') {
      ++pos_;
      children.push_back(parse_sum(1));
    }
    if (peek() != ')') throw parse_error("expected ')' or ','", pos_);
    ++pos_;
    int argc = static_cast<int>(children.size());
    if (argc < min_args || argc > max_args) {
      if (min_args == 1 && max_args == 1)
        throw parse_error("'" + std::string(name) + "' expects exactly 1 argument", start);
      throw parse_error("'" + std::string(name) + "' expects at least 2 arguments", start);
    }

    Expr::Node n;
    n.op = op;
    n.src_offset = static_cast<std::uint32_t>(start);
    if (max_args == 1) {
      n.a = children[0];
    } else {
      n.args_begin = static_cast<int>(args_->size());
      for (int c : children) args_->push_back(c);
      n.args_end = static_cast<int>(args_->size());
    }
    return add_node(n);
  }

  bool references_variable(int idx) const {
    const Expr::Node& n = (*nodes_)[idx];
    switch (n.op) {
      case ExprOp::Variable: return true;
      case ExprOp::Constant: return false;
      case ExprOp::Max:
      case ExprOp::Min:
        for (int i = n.args_begin; i < n.args_end; ++i)
          if (references_variable((*args_)[i])) return true;
        return false;
      default:
        if (n.a >= 0 && references_variable(n.a)) return true;
        if (n.b >= 0 && references_variable(n.b)) return true;
        return false;
    }
  }

  void check_depth(int depth) {
    if (depth > kMaxDepth)
      throw parse_error("expression nested too deeply", pos_);
  }
};

Expr parse_expression(std::string_view src, int dimension) {
  if (dimension < 1)
    throw parse_error("dimension must be >= 1", 0);
  return ExprParser(src, dimension).run();
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

int precedence(ExprOp op) {
  switch (op) {
    case ExprOp::Add:
    case ExprOp::Sub: return 1;
    case ExprOp::Mul:
    case ExprOp::Div: return 2;
    case ExprOp::Neg: return 3;
    case ExprOp::Pow: return 4;
    default: return 5;
  }
}

void print_node(const Expr& e, int idx, std::string& out);

void print_child(const Expr& e, int child, int min_prec, std::string& out) {
  bool parens = precedence(e.nodes()[child].op) < min_prec;
  if (parens) out += '(';
  print_node(e, child, out);
  if (parens) out += ')';
}

void print_node(const Expr& e, int idx, std::string& out) {
  const Expr::Node& n = e.nodes()[idx];
  switch (n.op) {
    case ExprOp::Constant: out += format_double(n.value); return;
    case ExprOp::Variable: out += 'x'; out += std::to_string(n.var); return;
    case ExprOp::Add:
      print_child(e, n.a, 1, out); out += " + "; print_child(e, n.b, 2, out); return;
    case ExprOp::Sub:
      print_child(e, n.a, 1, out); out += " - "; print_child(e, n.b, 2, out); return;
    case ExprOp::Mul:
      print_child(e, n.a, 2, out); out += " * "; print_child(e, n.b, 3, out); return;
    case ExprOp::Div:
      print_child(e, n.a, 2, out); out += " / "; print_child(e, n.b, 3, out); return;
    case ExprOp::Neg:
      out += '-'; print_child(e, n.a, 3, out); return;
    case ExprOp::Pow:
      // Base must be an atom: unary minus binds looser than '^'.
      print_child(e, n.a, 5, out);
      out += '^';
      print_child(e, n.b, 5, out);
      return;
    case ExprOp::Sin:
    case ExprOp::Cos:
    case ExprOp::Exp:
    case ExprOp::Sqrt:
    case ExprOp::Abs: {
      const char* name = n.op == ExprOp::Sin    ? "sin"
                         : n.op == ExprOp::Cos  ? "cos"
                         : n.op == ExprOp::Exp  ? "exp"
                         : n.op == ExprOp::Sqrt ? "sqrt"
                                                : "abs";
      out += name; out += '(';
      print_node(e, n.a, out);
      out += ')';
      return;
    }
    case ExprOp::Max:
    case ExprOp::Min:
      out += n.op == ExprOp::Max ? "max(" : "min(";
      for (int i = n.args_begin; i < n.args_end; ++i) {
        if (i > n.args_begin) out += ", ";
        print_node(e, e.arg_pool()[i], out);
      }
      out += ')';
      return;
  }
}

std::string print_subtree(const Expr& e, int idx) {
  std::string out;
  print_node(e, idx, out);
  return out;
}

double eval_node(const Expr& e, int idx, std::span<const double> x, int component) {
  const Expr::Node& n = e.nodes()[idx];
  switch (n.op) {
    case ExprOp::Constant: return n.value;
    case ExprOp::Variable: return x[n.var - 1];
    case ExprOp::Add: return eval_node(e, n.a, x, component) + eval_node(e, n.b, x, component);
    case ExprOp::Sub: return eval_node(e, n.a, x, component) - eval_node(e, n.b, x, component);
    case ExprOp::Mul: return eval_node(e, n.a, x, component) * eval_node(e, n.b, x, component);
    case ExprOp::Div: {
      double num = eval_node(e, n.a, x, component);
      double den = eval_node(e, n.b, x, component);
      if (den == 0.0)
        throw eval_error("division by zero", print_subtree(e, idx), component);
      return num / den;
    }
    case ExprOp::Pow: {
      double base = eval_node(e, n.a, x, component);
      double ex = eval_node(e, n.b, x, component);
      if (base == 0.0 && ex < 0.0)
        throw eval_error("zero raised to a negative power", print_subtree(e, idx), component);
      if (base < 0.0 && ex != std::floor(ex))
        throw eval_error("negative base raised to a non-integer power",
                         print_subtree(e, idx), component);
      return std::pow(base, ex);
    }
    case ExprOp::Neg: return -eval_node(e, n.a, x, component);
    case ExprOp::Sin: return std::sin(eval_node(e, n.a, x, component));
    case ExprOp::Cos: return std::cos(eval_node(e, n.a, x, component));
    case ExprOp::Exp: return std::exp(eval_node(e, n.a, x, component));
    case ExprOp::Sqrt: {
      double v = eval_node(e, n.a, x, component);
      if (v < 0.0)
        throw eval_error("sqrt of a negative number", print_subtree(e, idx), component);
      return std::sqrt(v);
    }
    case ExprOp::Abs: return std::fabs(eval_node(e, n.a, x, component));
    case ExprOp::Max: {
      double best = eval_node(e, e.arg_pool()[n.args_begin], x, component);
      for (int i = n.args_begin + 1; i < n.args_end; ++i)
        best = std::fmax(best, eval_node(e, e.arg_pool()[i], x, component));
      return best;
    }
    case ExprOp::Min: {
      double best = eval_node(e, e.arg_pool()[n.args_begin], x, component);
      for (int i = n.args_begin + 1; i < n.args_end; ++i)
        best = std::fmin(best, eval_node(e, e.arg_pool()[i], x, component));
      return best;
    }
  }
  return 0.0;  // unreachable
}

double eval_checked(const Expr& e, std::span<const double> x, int component) {
  if (e.root() < 0) throw eval_error("empty expression", "", component);
  if (static_cast<int>(x.size()) < e.max_var())
    throw eval_error("state vector too short for variable x" + std::to_string(e.max_var()),
                     print_subtree(e, e.root()), component);
  double v = eval_node(e, e.root(), x, component);
  if (std::isnan(v))
    throw eval_error("evaluation produced NaN", print_subtree(e, e.root()), component);
  return v;
}

}  // namespace

double eval_expression(const Expr& e, std::span<const double> x) {
  return eval_checked(e, x, -1);
}

std::vector<double> eval_field(const std::vector<Expr>& field, std::span<const double> x) {
  std::vector<double> out(field.size());
  eval_field_into(field, x, out);
  return out;
}

void eval_field_into(const std::vector<Expr>& field, std::span<const double> x,
                     std::span<double> out) {
  for (std::size_t i = 0; i < field.size(); ++i)
    out[i] = eval_checked(field[i], x, static_cast<int>(i));
}

std::string pretty_print(const Expr& e) {
  if (e.root() < 0) return "";
  return print_subtree(e, e.root());
}

bool Expr::structurally_equal(const Expr& other) const {
  struct Cmp {
    const Expr& lhs;
    const Expr& rhs;
    bool eq(int a, int b) const {
      const Node& x = lhs.nodes_[a];
      const Node& y = rhs.nodes_[b];
      if (x.op != y.op) return false;
      switch (x.op) {
        case ExprOp::Constant: {
          // bit comparison: distinguishes 0.0 from -0.0, has no NaN surprises
          return std::memcmp(&x.value, &y.value, sizeof(double)) == 0;
        }
        case ExprOp::Variable: return x.var == y.var;
        case ExprOp::Max:
        case ExprOp::Min: {
          int nx = x.args_end - x.args_begin;
          int ny = y.args_end - y.args_begin;
          if (nx != ny) return false;
          for (int i = 0; i < nx; ++i)
            if (!eq(lhs.args_[x.args_begin + i], rhs.args_[y.args_begin + i]))
              return false;
          return true;
        }
        default:
          if ((x.a >= 0) != (y.a >= 0) || (x.b >= 0) != (y.b >= 0)) return false;
          if (x.a >= 0 && !eq(x.a, y.a)) return false;
          if (x.b >= 0 && !eq(x.b, y.b)) return false;
          return true;
      }
    }
  };
  if (root_ < 0 || other.root_ < 0) return root_ == other.root_;
  return Cmp{*this, other}.eq(root_, other.root_);
}

}  // namespace osl
