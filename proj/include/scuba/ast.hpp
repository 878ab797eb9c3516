#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scuba/source.hpp"

namespace scuba {

enum class ScalarType { Void, Int, Unsigned, Long, SizeT, Float, Double };

const char* scalar_type_name(ScalarType type);
bool is_integral(ScalarType type);

enum class BuiltinKind { TidX, TidY, TidZ, BidX, BidY, BidZ, BDimX, BDimY, BDimZ, GDimX, GDimY, GDimZ };

inline constexpr int kBuiltinCount = 12;

/// "threadIdx.x" style spelling.
const char* builtin_source_name(BuiltinKind kind);
/// "TidX" style spelling, used for solver variable names.
const char* builtin_short_name(BuiltinKind kind);

enum class BinaryOp { Add, Sub, Mul, Div, Mod };
const char* binary_op_symbol(BinaryOp op);

enum class RelOp { Lt, Le, Gt, Ge, Eq, Ne };
const char* rel_op_symbol(RelOp op);
RelOp negate(RelOp op);

enum class AtomicOp { Min, Max, Add };
const char* atomic_op_name(AtomicOp op);

using DeclId = int;
inline constexpr DeclId kNoDecl = -1;

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;

struct Expr {
  enum class Kind { IntLit, FloatLit, Var, Index, Builtin, Input, Binary, Neg, Atomic };

  Kind kind = Kind::IntLit;
  SourceLocation loc;
  std::int64_t int_value = 0;
  double float_value = 0.0;
  std::string text;             // literal spelling, or the referenced name
  DeclId decl = kNoDecl;        // Var, Index, Atomic (target array)
  BuiltinKind builtin = BuiltinKind::TidX;
  BinaryOp op = BinaryOp::Add;
  AtomicOp atomic = AtomicOp::Add;
  // Index: subscripts. Binary: lhs, rhs. Neg: operand. Atomic: Index target, value.
  std::vector<ExprPtr> args;
};

struct Comparison {
  RelOp op = RelOp::Lt;
  ExprPtr lhs;
  ExprPtr rhs;
  SourceLocation loc;
};

/// Conjunction of comparisons.
using Condition = std::vector<Comparison>;

struct LaunchDim {
  bool is_dim3 = false;
  std::vector<ExprPtr> comps;
  SourceLocation loc;
};

struct Stmt {
  enum class Kind { Decl, Store, Free, Launch, Assert, For, If, ExprStmt, Return, Block };
  enum class Init { None, Expr, Malloc, AddrOf };

  Kind kind = Kind::Block;
  SourceLocation loc;

  // Decl: declared entity. Free: freed pointer. For: induction variable.
  DeclId decl = kNoDecl;
  std::string name;

  // Decl
  Init init = Init::None;
  // Decl: initializer (Expr), size (Malloc) or Index expression (AddrOf).
  // Store: Index target. ExprStmt: the expression. For: lower bound. Return: optional value.
  ExprPtr expr;
  // Store: stored value. For: upper bound.
  ExprPtr value;
  bool compound = false;   // Store with '+='
  bool inclusive = false;  // For with '<='

  // Launch
  int kernel = -1;
  LaunchDim grid;
  LaunchDim block;
  ExprPtr shm;
  std::vector<ExprPtr> args;

  // Assert, If
  Condition cond;

  // For, If (then arm), Block
  std::vector<StmtPtr> body;
  std::vector<StmtPtr> else_body;
  bool has_else = false;
};

enum class DeclKind { Scalar, Pointer, Array };

struct Decl {
  std::string name;
  SourceLocation loc;
  int function = -1;            // -1 for host main, otherwise kernel index
  DeclKind kind = DeclKind::Scalar;
  ScalarType elem = ScalarType::Int;
  bool explicit_type = true;    // false for `x = e;` style declarations
  bool star_prefix = false;     // `*p = &a[i];` style pointer declarations
  bool is_const = false;
  bool is_shared = false;
  bool is_extern = false;
  bool is_param = false;
  int param_index = -1;
  bool is_loop_var = false;
  std::vector<ExprPtr> dims;    // Array extents; empty for `extern __shared__ T a[]`
};

struct Kernel {
  std::string name;
  SourceLocation loc;
  std::vector<DeclId> params;
  std::vector<StmtPtr> body;
};

struct Ast {
  std::string file;
  int line_count = 0;
  std::vector<Kernel> kernels;
  bool has_main = false;
  bool main_returns_int = false;
  SourceLocation main_loc;
  std::vector<StmtPtr> host_main;
  std::vector<Decl> decls;

  const Decl& decl(DeclId id) const { return decls.at(static_cast<std::size_t>(id)); }
  std::optional<int> find_kernel(const std::string& name) const;
};

/// Static type of an expression: the element type of whatever it reads.
ScalarType expr_type(const Ast& ast, const Expr& e);

/// Renders the program back to MiniCUDA text. Parsing the output gives a
/// structurally equal Ast.
std::string print_ast(const Ast& ast);
std::string print_expr(const Ast& ast, const Expr& e);
std::string print_condition(const Ast& ast, const Condition& c);

/// Compares two programs ignoring source locations.
bool structurally_equal(const Ast& a, const Ast& b);

/// Calls fn for every source location stored in the tree.
template <typename Fn> void for_each_location(const Ast& ast, Fn&& fn);

namespace detail {
template <typename Fn> void visit_expr_locs(const Expr& e, Fn& fn) {
  fn(e.loc);
  for (const auto& a : e.args)
    visit_expr_locs(*a, fn);
}
template <typename Fn> void visit_cond_locs(const Condition& c, Fn& fn) {
  for (const auto& cmp : c) {
    fn(cmp.loc);
    visit_expr_locs(*cmp.lhs, fn);
    visit_expr_locs(*cmp.rhs, fn);
  }
}
template <typename Fn> void visit_stmt_locs(const Stmt& s, Fn& fn) {
  fn(s.loc);
  if (s.expr) visit_expr_locs(*s.expr, fn);
  if (s.value) visit_expr_locs(*s.value, fn);
  if (s.shm) visit_expr_locs(*s.shm, fn);
  for (const auto* d : {&s.grid, &s.block})
    for (const auto& c : d->comps)
      visit_expr_locs(*c, fn);
  for (const auto& a : s.args)
    visit_expr_locs(*a, fn);
  visit_cond_locs(s.cond, fn);
  for (const auto& b : s.body)
    visit_stmt_locs(*b, fn);
  for (const auto& b : s.else_body)
    visit_stmt_locs(*b, fn);
}
} // namespace detail

template <typename Fn> void for_each_location(const Ast& ast, Fn&& fn) {
  for (const auto& d : ast.decls) {
    fn(d.loc);
    for (const auto& e : d.dims)
      detail::visit_expr_locs(*e, fn);
  }
  for (const auto& k : ast.kernels) {
    fn(k.loc);
    for (const auto& s : k.body)
      detail::visit_stmt_locs(*s, fn);
  }
  if (ast.has_main)
    fn(ast.main_loc);
  for (const auto& s : ast.host_main)
    detail::visit_stmt_locs(*s, fn);
}

} // namespace scuba
