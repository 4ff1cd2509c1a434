#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace osl {

// Scalar expression language over variables x1..xn.
//
// Grammar (precedence low to high: +,- < *,/ < unary - < ^):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := atom ('^' unary)?          right-associative
//   atom    := number | 'x'<digits> | func '(' sum (',' sum)* ')' | '(' sum ')'
//   func    := sin | cos | exp | sqrt | abs | max | min
//
// Numbers are unsigned decimal literals with optional fraction and exponent
// (e.g. 2, 0.5, 1.3e-4).  The exponent subtree of '^' must not reference any
// variable.  max/min take two or more arguments; the other functions exactly
// one.

enum class ExprOp : std::uint8_t {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Sin,
  Cos,
  Exp,
  Sqrt,
  Abs,
  Max,
  Min,
};

struct parse_error : std::runtime_error {
  parse_error(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " at offset " + std::to_string(offset)),
        offset(offset) {}
  std::size_t offset;
};

struct eval_error : std::runtime_error {
  eval_error(const std::string& msg, const std::string& subexpr, int component = -1)
      : std::runtime_error(component < 0
                               ? msg + " in '" + subexpr + "'"
                               : msg + " in '" + subexpr + "' (component " +
                                     std::to_string(component) + ")"),
        subexpr(subexpr),
        component(component) {}
  std::string subexpr;  // pretty-printed offending subexpression
  int component;        // field component index, -1 for scalar evaluation
};

class Expr {
 public:
  struct Node {
    ExprOp op;
    double value = 0.0;        // Constant payload
    int var = 0;               // Variable payload, 1-based
    int a = -1;                // first child
    int b = -1;                // second child (binary ops)
    int args_begin = 0;        // Max/Min: range into arg pool
    int args_end = 0;
    std::uint32_t src_offset = 0;
  };

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& arg_pool() const { return args_; }
  int root() const { return root_; }
  int max_var() const { return max_var_; }

  bool structurally_equal(const Expr& other) const;

  friend Expr parse_expression(std::string_view src, int dimension);

 private:
  friend class ExprParser;
  std::vector<Node> nodes_;
  std::vector<int> args_;
  int root_ = -1;
  int max_var_ = 0;
};

// Parses src over variables x1..x<dimension>.  Throws parse_error.
Expr parse_expression(std::string_view src, int dimension);

// Evaluates e at x (x.size() >= e.max_var()).  Throws eval_error on domain
// errors: division by zero, 0 raised to a negative power, a negative base
// raised to a non-integer power, sqrt of a negative number.  Never returns
// a quiet NaN.
double eval_expression(const Expr& e, std::span<const double> x);

// Evaluates each component; eval_error gains the component index.
std::vector<double> eval_field(const std::vector<Expr>& field, std::span<const double> x);
void eval_field_into(const std::vector<Expr>& field, std::span<const double> x,
                     std::span<double> out);

// Minimal-parenthesis source form; parse_expression(pretty_print(e)) is
// structurally identical to e for any e reachable from the grammar.
std::string pretty_print(const Expr& e);

// Shortest round-trip decimal form (std::to_chars); the numeric format of
// every emitted file.
std::string format_double(double v);

}  // namespace osl
