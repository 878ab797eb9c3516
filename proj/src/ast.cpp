#include "scuba/ast.hpp"

#include <sstream>

namespace scuba {

const char* scalar_type_name(ScalarType type) {
  switch (type) {
  case ScalarType::Void: return "void";
  case ScalarType::Int: return "int";
  case ScalarType::Unsigned: return "unsigned";
  case ScalarType::Long: return "long";
  case ScalarType::SizeT: return "size_t";
  case ScalarType::Float: return "float";
  case ScalarType::Double: return "double";
  }
  return "int";
}

bool is_integral(ScalarType type) {
  return type == ScalarType::Int || type == ScalarType::Unsigned || type == ScalarType::Long ||
         type == ScalarType::SizeT;
}

const char* builtin_source_name(BuiltinKind kind) {
  static const char* names[] = {"threadIdx.x", "threadIdx.y", "threadIdx.z", "blockIdx.x",
                                "blockIdx.y",  "blockIdx.z",  "blockDim.x",  "blockDim.y",
                                "blockDim.z",  "gridDim.x",   "gridDim.y",   "gridDim.z"};
  return names[static_cast<int>(kind)];
}

const char* builtin_short_name(BuiltinKind kind) {
  static const char* names[] = {"TidX",  "TidY",  "TidZ",  "BidX",  "BidY",  "BidZ",
                                "BDimX", "BDimY", "BDimZ", "GDimX", "GDimY", "GDimZ"};
  return names[static_cast<int>(kind)];
}

const char* binary_op_symbol(BinaryOp op) {
  switch (op) {
  case BinaryOp::Add: return "+";
  case BinaryOp::Sub: return "-";
  case BinaryOp::Mul: return "*";
  case BinaryOp::Div: return "/";
  case BinaryOp::Mod: return "%";
  }
  return "?";
}

const char* rel_op_symbol(RelOp op) {
  switch (op) {
  case RelOp::Lt: return "<";
  case RelOp::Le: return "<=";
  case RelOp::Gt: return ">";
  case RelOp::Ge: return ">=";
  case RelOp::Eq: return "==";
  case RelOp::Ne: return "!=";
  }
  return "?";
}

RelOp negate(RelOp op) {
  switch (op) {
  case RelOp::Lt: return RelOp::Ge;
  case RelOp::Le: return RelOp::Gt;
  case RelOp::Gt: return RelOp::Le;
  case RelOp::Ge: return RelOp::Lt;
  case RelOp::Eq: return RelOp::Ne;
  case RelOp::Ne: return RelOp::Eq;
  }
  return op;
}

const char* atomic_op_name(AtomicOp op) {
  switch (op) {
  case AtomicOp::Min: return "atomicMin";
  case AtomicOp::Max: return "atomicMax";
  case AtomicOp::Add: return "atomicAdd";
  }
  return "atomic";
}

std::optional<int> Ast::find_kernel(const std::string& name) const {
  for (std::size_t i = 0; i < kernels.size(); ++i)
    if (kernels[i].name == name)
      return static_cast<int>(i);
  return std::nullopt;
}

ScalarType expr_type(const Ast& ast, const Expr& e) {
  switch (e.kind) {
  case Expr::Kind::IntLit:
  case Expr::Kind::Builtin:
  case Expr::Kind::Input:
    return ScalarType::Int;
  case Expr::Kind::FloatLit:
    return ScalarType::Double;
  case Expr::Kind::Var:
  case Expr::Kind::Index:
  case Expr::Kind::Atomic:
    return e.decl == kNoDecl ? ScalarType::Int : ast.decl(e.decl).elem;
  case Expr::Kind::Neg:
    return expr_type(ast, *e.args[0]);
  case Expr::Kind::Binary: {
    ScalarType l = expr_type(ast, *e.args[0]);
    ScalarType r = expr_type(ast, *e.args[1]);
    if (!is_integral(l) || !is_integral(r))
      return ScalarType::Double;
    return ScalarType::Int;
  }
  }
  return ScalarType::Int;
}

namespace {

int precedence(const Expr& e) {
  if (e.kind == Expr::Kind::Binary)
    return (e.op == BinaryOp::Add || e.op == BinaryOp::Sub) ? 1 : 2;
  if (e.kind == Expr::Kind::Neg)
    return 3;
  return 4;
}

class Printer {
public:
  explicit Printer(const Ast& ast) : ast_(ast) {}

  std::string expr(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::IntLit: return std::to_string(e.int_value);
    case Expr::Kind::FloatLit: return e.text;
    case Expr::Kind::Var: return e.text;
    case Expr::Kind::Builtin: return builtin_source_name(e.builtin);
    case Expr::Kind::Input: return "__input()";
    case Expr::Kind::Index: {
      std::string s = e.text;
      for (const auto& a : e.args)
        s += "[" + expr(*a) + "]";
      return s;
    }
    case Expr::Kind::Neg: {
      const Expr& inner = *e.args[0];
      if (precedence(inner) < 3)
        return "-(" + expr(inner) + ")";
      return "-" + expr(inner);
    }
    case Expr::Kind::Atomic:
      return std::string(atomic_op_name(e.atomic)) + "(&" + expr(*e.args[0]) + ", " +
             expr(*e.args[1]) + ")";
    case Expr::Kind::Binary: {
      int p = precedence(e);
      std::string l = expr(*e.args[0]);
      std::string r = expr(*e.args[1]);
      if (precedence(*e.args[0]) < p)
        l = "(" + l + ")";
      if (precedence(*e.args[1]) <= p)
        r = "(" + r + ")";
      return l + " " + binary_op_symbol(e.op) + " " + r;
    }
    }
    return "?";
  }

  std::string cond(const Condition& c) {
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i)
        s += " && ";
      s += expr(*c[i].lhs) + " " + rel_op_symbol(c[i].op) + " " + expr(*c[i].rhs);
    }
    return s;
  }

  std::string program() {
    for (const auto& k : ast_.kernels) {
      out_ << "__global__ void " << k.name << "(";
      for (std::size_t i = 0; i < k.params.size(); ++i) {
        const Decl& d = ast_.decl(k.params[i]);
        if (i)
          out_ << ", ";
        out_ << (d.is_const ? "const " : "") << scalar_type_name(d.elem)
             << (d.kind == DeclKind::Pointer ? "* " : " ") << d.name;
      }
      out_ << ") {\n";
      block(k.body, 1);
      out_ << "}\n\n";
    }
    if (ast_.has_main) {
      out_ << (ast_.main_returns_int ? "int" : "void") << " main() {\n";
      block(ast_.host_main, 1);
      out_ << "}\n";
    }
    return out_.str();
  }

private:
  void indent(int depth) {
    for (int i = 0; i < depth; ++i)
      out_ << "  ";
  }

  void block(const std::vector<StmtPtr>& stmts, int depth) {
    for (const auto& s : stmts)
      stmt(*s, depth);
  }

  std::string decl_text(const Stmt& s) {
    const Decl& d = ast_.decl(s.decl);
    std::string head;
    if (d.explicit_type) {
      if (d.is_extern)
        head += "extern ";
      if (d.is_shared)
        head += "__shared__ ";
      if (d.is_const)
        head += "const ";
      head += scalar_type_name(d.elem);
      head += d.kind == DeclKind::Pointer ? "* " : " ";
    } else if (d.star_prefix) {
      head += "*";
    }
    head += d.name;
    if (d.kind == DeclKind::Array) {
      if (d.dims.empty())
        head += "[]";
      for (const auto& dim : d.dims)
        head += "[" + expr(*dim) + "]";
    }
    switch (s.init) {
    case Stmt::Init::None: break;
    case Stmt::Init::Expr: head += " = " + expr(*s.expr); break;
    case Stmt::Init::Malloc: head += " = cudaMalloc(" + expr(*s.expr) + ")"; break;
    case Stmt::Init::AddrOf: head += " = &" + expr(*s.expr); break;
    }
    return head;
  }

  std::string dim(const LaunchDim& d) {
    if (!d.is_dim3)
      return expr(*d.comps[0]);
    std::string s = "dim3(";
    for (std::size_t i = 0; i < d.comps.size(); ++i)
      s += (i ? ", " : "") + expr(*d.comps[i]);
    return s + ")";
  }

  void stmt(const Stmt& s, int depth) {
    indent(depth);
    switch (s.kind) {
    case Stmt::Kind::Decl:
      out_ << decl_text(s) << ";\n";
      break;
    case Stmt::Kind::Store:
      out_ << expr(*s.expr) << (s.compound ? " += " : " = ") << expr(*s.value) << ";\n";
      break;
    case Stmt::Kind::Free:
      out_ << "cudaFree(" << s.name << ");\n";
      break;
    case Stmt::Kind::Launch:
      out_ << s.name << "<<<" << dim(s.grid) << ", " << dim(s.block);
      if (s.shm)
        out_ << ", " << expr(*s.shm);
      out_ << ">>>(";
      for (std::size_t i = 0; i < s.args.size(); ++i)
        out_ << (i ? ", " : "") << expr(*s.args[i]);
      out_ << ");\n";
      break;
    case Stmt::Kind::Assert:
      out_ << "assert(" << cond(s.cond) << ");\n";
      break;
    case Stmt::Kind::For: {
      const Decl& d = ast_.decl(s.decl);
      out_ << "for (" << (d.explicit_type ? std::string(scalar_type_name(d.elem)) + " " : "")
           << d.name << " = " << expr(*s.expr) << "; " << d.name << (s.inclusive ? " <= " : " < ")
           << expr(*s.value) << "; " << d.name << "++) {\n";
      block(s.body, depth + 1);
      indent(depth);
      out_ << "}\n";
      break;
    }
    case Stmt::Kind::If:
      out_ << "if (" << cond(s.cond) << ") {\n";
      block(s.body, depth + 1);
      indent(depth);
      if (s.has_else) {
        out_ << "} else {\n";
        block(s.else_body, depth + 1);
        indent(depth);
      }
      out_ << "}\n";
      break;
    case Stmt::Kind::ExprStmt:
      out_ << expr(*s.expr) << ";\n";
      break;
    case Stmt::Kind::Return:
      out_ << "return" << (s.expr ? " " + expr(*s.expr) : std::string()) << ";\n";
      break;
    case Stmt::Kind::Block:
      out_ << "{\n";
      block(s.body, depth + 1);
      indent(depth);
      out_ << "}\n";
      break;
    }
  }

  const Ast& ast_;
  std::ostringstream out_;
};

bool eq_expr(const Expr* a, const Expr* b);

bool eq_exprs(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!eq_expr(a[i].get(), b[i].get()))
      return false;
  return true;
}

bool eq_expr(const Expr* a, const Expr* b) {
  if (!a || !b)
    return a == b;
  if (a->kind != b->kind || a->decl != b->decl)
    return false;
  switch (a->kind) {
  case Expr::Kind::IntLit:
    if (a->int_value != b->int_value) return false;
    break;
  case Expr::Kind::FloatLit:
    if (a->float_value != b->float_value) return false;
    break;
  case Expr::Kind::Var:
  case Expr::Kind::Index:
    if (a->text != b->text) return false;
    break;
  case Expr::Kind::Builtin:
    if (a->builtin != b->builtin) return false;
    break;
  case Expr::Kind::Binary:
    if (a->op != b->op) return false;
    break;
  case Expr::Kind::Atomic:
    if (a->atomic != b->atomic) return false;
    break;
  default:
    break;
  }
  return eq_exprs(a->args, b->args);
}

bool eq_cond(const Condition& a, const Condition& b) {
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].op != b[i].op || !eq_expr(a[i].lhs.get(), b[i].lhs.get()) ||
        !eq_expr(a[i].rhs.get(), b[i].rhs.get()))
      return false;
  return true;
}

bool eq_dim(const LaunchDim& a, const LaunchDim& b) {
  return a.is_dim3 == b.is_dim3 && eq_exprs(a.comps, b.comps);
}

bool eq_stmts(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b);

bool eq_stmt(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.decl == b.decl && a.name == b.name && a.init == b.init &&
         eq_expr(a.expr.get(), b.expr.get()) && eq_expr(a.value.get(), b.value.get()) &&
         a.compound == b.compound && a.inclusive == b.inclusive && a.kernel == b.kernel &&
         eq_dim(a.grid, b.grid) && eq_dim(a.block, b.block) && eq_expr(a.shm.get(), b.shm.get()) &&
         eq_exprs(a.args, b.args) && eq_cond(a.cond, b.cond) && eq_stmts(a.body, b.body) &&
         eq_stmts(a.else_body, b.else_body) && a.has_else == b.has_else;
}

bool eq_stmts(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b) {
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!eq_stmt(*a[i], *b[i]))
      return false;
  return true;
}

bool eq_decl(const Decl& a, const Decl& b) {
  return a.name == b.name && a.function == b.function && a.kind == b.kind && a.elem == b.elem &&
         a.explicit_type == b.explicit_type && a.star_prefix == b.star_prefix &&
         a.is_const == b.is_const && a.is_shared == b.is_shared && a.is_extern == b.is_extern &&
         a.is_param == b.is_param && a.param_index == b.param_index &&
         a.is_loop_var == b.is_loop_var && eq_exprs(a.dims, b.dims);
}

} // namespace

std::string print_ast(const Ast& ast) { return Printer(ast).program(); }

std::string print_expr(const Ast& ast, const Expr& e) { return Printer(ast).expr(e); }

std::string print_condition(const Ast& ast, const Condition& c) { return Printer(ast).cond(c); }

bool structurally_equal(const Ast& a, const Ast& b) {
  if (a.kernels.size() != b.kernels.size() || a.decls.size() != b.decls.size() ||
      a.has_main != b.has_main || a.main_returns_int != b.main_returns_int)
    return false;
  for (std::size_t i = 0; i < a.decls.size(); ++i)
    if (!eq_decl(a.decls[i], b.decls[i]))
      return false;
  for (std::size_t i = 0; i < a.kernels.size(); ++i) {
    const Kernel& x = a.kernels[i];
    const Kernel& y = b.kernels[i];
    if (x.name != y.name || x.params != y.params || !eq_stmts(x.body, y.body))
      return false;
  }
  return eq_stmts(a.host_main, b.host_main);
}

} // namespace scuba
