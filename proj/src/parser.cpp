#include "scuba/parser.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

namespace scuba {

namespace {

using K = TokenKind;
using FK = FrontendError::Kind;

bool is_builtin_base(const std::string& name) {
  return name == "threadIdx" || name == "blockIdx" || name == "blockDim" || name == "gridDim";
}

class Parser {
public:
  explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {
    if (toks_.empty() || toks_.back().kind != K::Eof)
      throw InternalError("token sequence must end with Eof");
    ast_.file = toks_.back().loc.file;
    ast_.line_count = toks_.back().loc.line;
  }

  Ast run() {
    while (!at(K::Eof)) {
      if (at(K::KwGlobal)) {
        if (ast_.has_main)
          fail_syntax("kernels must be defined before main");
        kernel();
      } else if ((at(K::KwVoid) || at(K::KwInt)) && peek(1).kind == K::Ident &&
                 peek(1).text == "main") {
        if (ast_.has_main)
          error(FK::Name, cur().loc, "redefinition of 'main'");
        host_main();
      } else {
        fail_syntax("expected '__global__' kernel or 'main'");
      }
    }
    return std::move(ast_);
  }

private:
  // ---- token helpers ----
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t n) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  bool at(K k) const { return cur().kind == k; }
  const Token& take() {
    const Token& t = toks_[pos_];
    if (t.kind != K::Eof)
      ++pos_;
    return t;
  }
  bool accept(K k) {
    if (!at(k))
      return false;
    take();
    return true;
  }
  const Token& expect(K k, const char* what = nullptr) {
    if (!at(k)) {
      std::string expected = what ? what : token_kind_name(k);
      fail_syntax("expected " + expected);
    }
    return take();
  }

  [[noreturn]] void error(FK kind, const SourceLocation& loc, const std::string& msg) const {
    throw FrontendError(kind, loc, msg);
  }
  [[noreturn]] void fail_syntax(const std::string& msg) const {
    std::string found = at(K::Eof) ? "end of file" : "'" + cur().text + "'";
    error(FK::Syntax, cur().loc, msg + ", found " + found);
  }

  // ---- scopes ----
  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }

  DeclId lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end())
        return f->second;
    }
    return kNoDecl;
  }

  DeclId declare(Decl d) {
    if (in_kernel() && is_builtin_base(d.name))
      error(FK::Name, d.loc, "'" + d.name + "' is a reserved builtin name");
    auto& top = scopes_.back();
    if (top.count(d.name))
      error(FK::Name, d.loc, "redeclaration of '" + d.name + "'");
    d.function = function_;
    DeclId id = static_cast<DeclId>(ast_.decls.size());
    top[d.name] = id;
    ast_.decls.push_back(std::move(d));
    return id;
  }

  bool in_kernel() const { return function_ >= 0; }

  // ---- types ----
  bool at_type() const {
    switch (cur().kind) {
    case K::KwInt: case K::KwUnsigned: case K::KwLong: case K::KwSizeT:
    case K::KwFloat: case K::KwDouble:
      return true;
    default:
      return false;
    }
  }

  ScalarType type() {
    switch (cur().kind) {
    case K::KwInt: take(); return ScalarType::Int;
    case K::KwUnsigned:
      take();
      if (!accept(K::KwInt))
        accept(K::KwLong);
      return ScalarType::Unsigned;
    case K::KwLong:
      take();
      accept(K::KwLong);
      accept(K::KwInt);
      return ScalarType::Long;
    case K::KwSizeT: take(); return ScalarType::SizeT;
    case K::KwFloat: take(); return ScalarType::Float;
    case K::KwDouble: take(); return ScalarType::Double;
    default: fail_syntax("expected a type");
    }
  }

  // ---- top level ----
  void kernel() {
    SourceLocation loc = take().loc;
    expect(K::KwVoid, "'void' (kernels return void)");
    const Token& name = expect(K::Ident, "kernel name");
    if (ast_.find_kernel(name.text))
      error(FK::Name, name.loc, "redefinition of kernel '" + name.text + "'");
    Kernel k;
    k.name = name.text;
    k.loc = loc;
    function_ = static_cast<int>(ast_.kernels.size());
    push_scope();
    expect(K::LParen);
    if (at(K::KwVoid) && peek(1).kind == K::RParen)
      take();
    if (!at(K::RParen)) {
      do {
        Decl d;
        d.loc = cur().loc;
        d.is_const = accept(K::KwConst);
        d.elem = type();
        if (accept(K::Star))
          d.kind = DeclKind::Pointer;
        d.name = expect(K::Ident, "parameter name").text;
        d.is_param = true;
        d.param_index = static_cast<int>(k.params.size());
        k.params.push_back(declare(std::move(d)));
      } while (accept(K::Comma));
    }
    expect(K::RParen);
    // Register before the body so the kernel name is visible for error messages.
    ast_.kernels.push_back(std::move(k));
    std::vector<StmtPtr> body = function_body();
    ast_.kernels.back().body = std::move(body);
    pop_scope();
    function_ = -1;
  }

  void host_main() {
    ast_.main_returns_int = at(K::KwInt);
    ast_.main_loc = take().loc;
    take(); // main
    expect(K::LParen);
    accept(K::KwVoid);
    expect(K::RParen);
    ast_.has_main = true;
    function_ = -1;
    push_scope();
    ast_.host_main = function_body();
    pop_scope();
    if (!at(K::Eof))
      fail_syntax("expected end of file after main");
  }

  std::vector<StmtPtr> function_body() {
    expect(K::LBrace);
    depth_ = 0;
    loop_depth_ = 0;
    return stmt_list();
  }

  // Parses statements up to and including the closing brace.
  std::vector<StmtPtr> stmt_list() {
    std::vector<StmtPtr> out;
    bool returned = false;
    while (!at(K::RBrace)) {
      if (at(K::Eof))
        fail_syntax("expected '}'");
      SourceLocation loc = cur().loc;
      std::vector<StmtPtr> parsed = stmt();
      if (returned && !parsed.empty())
        error(FK::Semantic, loc, "unreachable statement after return");
      for (auto& s : parsed) {
        returned = returned || always_returns(*s);
        out.push_back(std::move(s));
      }
    }
    take();
    return out;
  }

  static bool always_returns(const Stmt& s) {
    switch (s.kind) {
    case Stmt::Kind::Return: return true;
    case Stmt::Kind::Block:
      for (const auto& b : s.body)
        if (always_returns(*b))
          return true;
      return false;
    case Stmt::Kind::If: {
      if (!s.has_else)
        return false;
      bool t = false, e = false;
      for (const auto& b : s.body) t = t || always_returns(*b);
      for (const auto& b : s.else_body) e = e || always_returns(*b);
      return t && e;
    }
    default: return false;
    }
  }

  // Body of for/if: a braced block or a single statement, in its own scope.
  std::vector<StmtPtr> sub_body() {
    ++depth_;
    push_scope();
    std::vector<StmtPtr> out;
    if (accept(K::LBrace)) {
      out = stmt_list();
    } else {
      out = stmt();
    }
    pop_scope();
    --depth_;
    return out;
  }

  // ---- statements ----
  std::vector<StmtPtr> stmt() {
    std::vector<StmtPtr> out;
    switch (cur().kind) {
    case K::LBrace: {
      auto s = make_stmt(Stmt::Kind::Block);
      take();
      ++depth_;
      push_scope();
      s->body = stmt_list();
      pop_scope();
      --depth_;
      out.push_back(std::move(s));
      return out;
    }
    case K::KwFor: out.push_back(for_stmt()); return out;
    case K::KwIf: out.push_back(if_stmt()); return out;
    case K::KwReturn: out.push_back(return_stmt()); return out;
    case K::KwAssert: out.push_back(assert_stmt()); return out;
    case K::KwFree: out.push_back(free_stmt()); return out;
    case K::Semi: take(); return out;
    case K::KwAtomicMin: case K::KwAtomicMax: case K::KwAtomicAdd: {
      auto s = make_stmt(Stmt::Kind::ExprStmt);
      s->expr = atomic();
      expect(K::Semi);
      out.push_back(std::move(s));
      return out;
    }
    case K::Star: {
      SourceLocation loc = take().loc;
      const Token& name = expect(K::Ident, "pointer name");
      out.push_back(implicit_decl(name, loc, true));
      return out;
    }
    case K::Ident: {
      K next = peek(1).kind;
      if (next == K::LaunchOpen) {
        out.push_back(launch());
        return out;
      }
      if (next == K::LBracket) {
        out.push_back(store());
        return out;
      }
      if (next == K::Assign) {
        const Token& name = take();
        out.push_back(implicit_decl(name, name.loc, false));
        return out;
      }
      if (next == K::PlusAssign || next == K::PlusPlus) {
        if (lookup(cur().text) != kNoDecl)
          error(FK::Semantic, cur().loc,
                "reassignment of '" + cur().text + "' is not supported (single assignment)");
      }
      take();
      fail_syntax("expected '=', '[' or '<<<' after identifier");
    }
    default:
      break;
    }
    if (at(K::KwExtern) || at(K::KwShared) || at(K::KwConst) || at_type())
      return typed_decl();
    fail_syntax("expected a statement");
  }

  StmtPtr make_stmt(Stmt::Kind kind) {
    auto s = std::make_unique<Stmt>();
    s->kind = kind;
    s->loc = cur().loc;
    return s;
  }

  std::vector<StmtPtr> typed_decl() {
    SourceLocation start = cur().loc;
    bool is_extern = accept(K::KwExtern);
    bool is_shared = accept(K::KwShared);
    bool is_const = accept(K::KwConst);
    if (!is_shared && is_extern)
      error(FK::Semantic, start, "'extern' is only supported for '__shared__' arrays");
    if (is_shared && !in_kernel())
      error(FK::Semantic, start, "'__shared__' is only allowed in kernels");
    ScalarType elem = type();
    std::vector<StmtPtr> out;
    do {
      SourceLocation loc = out.empty() ? start : cur().loc;
      Decl d;
      d.elem = elem;
      d.is_const = is_const;
      d.is_shared = is_shared;
      d.is_extern = is_extern;
      if (accept(K::Star))
        d.kind = DeclKind::Pointer;
      const Token& name = expect(K::Ident, "declared name");
      d.name = name.text;
      d.loc = name.loc;
      if (at(K::LBracket)) {
        if (d.kind == DeclKind::Pointer)
          error(FK::Semantic, cur().loc, "arrays of pointers are not supported");
        d.kind = DeclKind::Array;
        while (accept(K::LBracket)) {
          if (at(K::RBracket)) {
            if (!is_extern)
              error(FK::Semantic, cur().loc, "array extent required");
            take();
            if (!d.dims.empty() || at(K::LBracket))
              error(FK::Semantic, cur().loc, "extern shared arrays must be one-dimensional");
            break;
          }
          if (is_extern)
            error(FK::Semantic, cur().loc, "extern shared arrays take no extent");
          ExprPtr dim = expr();
          require_integral(*dim, "array extent");
          d.dims.push_back(std::move(dim));
          expect(K::RBracket);
        }
        if (is_extern && d.dims.empty() && !in_kernel())
          error(FK::Semantic, loc, "extern shared arrays are only allowed in kernels");
      } else if (is_shared) {
        error(FK::Semantic, d.loc, "'__shared__' declarations must be arrays");
      }
      if (is_extern && d.kind != DeclKind::Array)
        error(FK::Semantic, d.loc, "'extern __shared__' declarations must be arrays");

      auto s = std::make_unique<Stmt>();
      s->kind = Stmt::Kind::Decl;
      s->loc = loc;
      s->name = d.name;
      if (accept(K::Assign)) {
        if (d.kind == DeclKind::Array)
          error(FK::Semantic, d.loc, "array initializers are not supported");
        initializer(*s, d);
      } else if (d.kind == DeclKind::Scalar) {
        error(FK::Semantic, d.loc, "scalar '" + d.name + "' requires an initializer");
      } else if (d.kind == DeclKind::Pointer && in_kernel()) {
        error(FK::Semantic, d.loc, "kernel pointer '" + d.name + "' requires an initializer");
      }
      if (d.kind == DeclKind::Scalar && s->init != Stmt::Init::Expr)
        error(FK::Type, d.loc, "scalar '" + d.name + "' initialized with a pointer value");
      if (d.kind == DeclKind::Pointer && s->init == Stmt::Init::Expr && !is_pointer_value(*s->expr))
        error(FK::Type, d.loc, "pointer '" + d.name + "' initialized with a scalar value");
      if (d.kind == DeclKind::Scalar) {
        if (is_integral(d.elem))
          require_integral(*s->expr, "initializer of '" + d.name + "'");
        else
          require_scalar(*s->expr, "initializer of '" + d.name + "'");
      }
      s->decl = declare(std::move(d));
      out.push_back(std::move(s));
    } while (accept(K::Comma));
    expect(K::Semi);
    return out;
  }

  // Parses the right-hand side of '=' into s (init kind and expression).
  void initializer(Stmt& s, Decl& d) {
    if (at(K::KwMalloc)) {
      SourceLocation loc = take().loc;
      if (in_kernel())
        error(FK::Semantic, loc, "cudaMalloc is only allowed in host code");
      expect(K::LParen);
      s.init = Stmt::Init::Malloc;
      s.expr = expr();
      require_integral(*s.expr, "cudaMalloc size");
      expect(K::RParen);
      return;
    }
    if (at(K::Amp)) {
      SourceLocation loc = take().loc;
      if (!in_kernel())
        error(FK::Semantic, loc, "pointer arithmetic is only supported in kernels");
      const Token& base = expect(K::Ident, "array name");
      s.init = Stmt::Init::AddrOf;
      s.expr = index_expr(base);
      if (s.expr->args.size() != 1)
        error(FK::Semantic, loc, "partition offsets must use a single subscript");
      if (!d.explicit_type)
        d.elem = ast_.decl(s.expr->decl).elem;
      return;
    }
    s.init = Stmt::Init::Expr;
    s.expr = expr();
    if (is_pointer_value(*s.expr) && !d.explicit_type)
      d.elem = ast_.decl(s.expr->decl).elem;
  }

  bool is_pointer_value(const Expr& e) const {
    return e.kind == Expr::Kind::Var && ast_.decl(e.decl).kind != DeclKind::Scalar;
  }

  StmtPtr implicit_decl(const Token& name, SourceLocation loc, bool star) {
    if (lookup(name.text) != kNoDecl)
      error(FK::Semantic, name.loc,
            "reassignment of '" + name.text + "' is not supported (single assignment)");
    expect(K::Assign);
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::Decl;
    s->loc = loc;
    s->name = name.text;
    Decl d;
    d.name = name.text;
    d.loc = name.loc;
    d.explicit_type = false;
    d.star_prefix = star;
    initializer(*s, d);
    if (s->init == Stmt::Init::Expr && !is_pointer_value(*s->expr)) {
      if (star)
        error(FK::Type, name.loc, "pointer '" + name.text + "' initialized with a scalar value");
      require_scalar(*s->expr, "initializer of '" + name.text + "'");
      d.kind = DeclKind::Scalar;
      d.elem = is_integral(expr_type(ast_, *s->expr)) ? ScalarType::Int : ScalarType::Double;
    } else {
      d.kind = DeclKind::Pointer;
    }
    expect(K::Semi);
    s->decl = declare(std::move(d));
    return s;
  }

  StmtPtr store() {
    auto s = make_stmt(Stmt::Kind::Store);
    const Token& name = take();
    s->expr = index_expr(name);
    if (accept(K::PlusAssign)) {
      s->compound = true;
    } else {
      expect(K::Assign, "'=' or '+='");
    }
    s->value = expr();
    require_scalar(*s->value, "stored value");
    if (is_integral(ast_.decl(s->expr->decl).elem))
      require_integral(*s->value, "stored value");
    expect(K::Semi);
    return s;
  }

  LaunchDim launch_dim() {
    LaunchDim d;
    d.loc = cur().loc;
    if (accept(K::KwDim3)) {
      d.is_dim3 = true;
      expect(K::LParen);
      d.comps.push_back(expr());
      expect(K::Comma);
      d.comps.push_back(expr());
      if (accept(K::Comma))
        d.comps.push_back(expr());
      expect(K::RParen);
    } else {
      d.comps.push_back(expr());
    }
    for (const auto& c : d.comps)
      require_integral(*c, "launch dimension");
    return d;
  }

  StmtPtr launch() {
    auto s = make_stmt(Stmt::Kind::Launch);
    const Token& name = take();
    if (in_kernel())
      error(FK::Semantic, name.loc, "kernel launches are only allowed in host code");
    auto k = ast_.find_kernel(name.text);
    if (!k)
      error(FK::Name, name.loc, "launch of undefined kernel '" + name.text + "'");
    s->name = name.text;
    s->kernel = *k;
    expect(K::LaunchOpen);
    s->grid = launch_dim();
    expect(K::Comma);
    s->block = launch_dim();
    if (accept(K::Comma)) {
      s->shm = expr();
      require_integral(*s->shm, "dynamic shared memory size");
    }
    expect(K::LaunchClose);
    expect(K::LParen);
    if (!at(K::RParen)) {
      do {
        s->args.push_back(expr());
      } while (accept(K::Comma));
    }
    expect(K::RParen);
    expect(K::Semi);

    const Kernel& kern = ast_.kernels[static_cast<std::size_t>(*k)];
    if (s->args.size() != kern.params.size())
      error(FK::Semantic, s->loc,
            "kernel '" + kern.name + "' expects " + std::to_string(kern.params.size()) +
                " arguments, launch passes " + std::to_string(s->args.size()));
    for (std::size_t i = 0; i < s->args.size(); ++i) {
      const Decl& p = ast_.decl(kern.params[i]);
      const Expr& a = *s->args[i];
      if (p.kind == DeclKind::Pointer) {
        if (a.kind != Expr::Kind::Var || ast_.decl(a.decl).kind != DeclKind::Pointer)
          error(FK::Type, a.loc,
                "argument " + std::to_string(i + 1) + " of '" + kern.name +
                    "' must be a device pointer");
      } else if (is_integral(p.elem)) {
        require_integral(a, "argument " + std::to_string(i + 1) + " of '" + kern.name + "'");
      } else {
        require_scalar(a, "argument " + std::to_string(i + 1) + " of '" + kern.name + "'");
      }
    }
    return s;
  }

  StmtPtr for_stmt() {
    auto s = make_stmt(Stmt::Kind::For);
    take();
    expect(K::LParen);
    push_scope();
    Decl d;
    d.kind = DeclKind::Scalar;
    d.is_loop_var = true;
    if (at_type()) {
      d.elem = type();
      if (!is_integral(d.elem))
        error(FK::Type, cur().loc, "loop variables must be integral");
    } else {
      d.explicit_type = false;
    }
    const Token& name = expect(K::Ident, "loop variable");
    if (lookup(name.text) != kNoDecl && !d.explicit_type)
      error(FK::Semantic, name.loc,
            "reassignment of '" + name.text + "' is not supported (single assignment)");
    d.name = name.text;
    d.loc = name.loc;
    expect(K::Assign);
    s->expr = expr();
    require_integral(*s->expr, "loop lower bound");
    expect(K::Semi);
    // The bound is parsed before the variable is in scope so it cannot refer to it.
    const Token& cname = expect(K::Ident, "loop variable");
    if (cname.text != name.text)
      error(FK::Semantic, cname.loc, "loop condition must test '" + name.text + "'");
    if (accept(K::LessEq)) {
      s->inclusive = true;
    } else {
      expect(K::Less, "'<' or '<='");
    }
    s->value = expr();
    require_integral(*s->value, "loop upper bound");
    expect(K::Semi);
    step(name.text);
    expect(K::RParen);
    s->name = name.text;
    s->decl = declare(std::move(d));
    ++loop_depth_;
    s->body = sub_body();
    --loop_depth_;
    pop_scope();
    return s;
  }

  void step(const std::string& var) {
    SourceLocation loc = cur().loc;
    auto unit = [&]() { return at(K::IntLit) && cur().int_value == 1; };
    auto var_tok = [&]() {
      const Token& t = expect(K::Ident, "loop variable");
      if (t.text != var)
        error(FK::Semantic, t.loc, "loop step must update '" + var + "'");
    };
    if (accept(K::PlusPlus)) {
      var_tok();
      return;
    }
    var_tok();
    if (accept(K::PlusPlus))
      return;
    if (accept(K::PlusAssign) && unit()) {
      take();
      return;
    }
    if (accept(K::Assign)) {
      if (at(K::Ident) && cur().text == var && peek(1).kind == K::Plus &&
          peek(2).kind == K::IntLit && peek(2).int_value == 1) {
        take();
        take();
        take();
        return;
      }
    }
    error(FK::Semantic, loc, "only unit-step loops are supported");
  }

  StmtPtr if_stmt() {
    auto s = make_stmt(Stmt::Kind::If);
    take();
    expect(K::LParen);
    s->cond = condition();
    expect(K::RParen);
    s->body = sub_body();
    if (accept(K::KwElse)) {
      s->has_else = true;
      s->else_body = sub_body();
    }
    return s;
  }

  StmtPtr return_stmt() {
    auto s = make_stmt(Stmt::Kind::Return);
    take();
    if (loop_depth_ > 0)
      error(FK::Semantic, s->loc, "return inside a loop is not supported");
    if (!at(K::Semi)) {
      if (in_kernel() || !ast_.main_returns_int)
        error(FK::Type, cur().loc, "void function cannot return a value");
      s->expr = expr();
      require_integral(*s->expr, "return value");
    }
    expect(K::Semi);
    return s;
  }

  StmtPtr assert_stmt() {
    auto s = make_stmt(Stmt::Kind::Assert);
    take();
    if (depth_ > 0)
      error(FK::Semantic, s->loc, "assert is only supported at function top level");
    expect(K::LParen);
    s->cond = condition();
    expect(K::RParen);
    expect(K::Semi);
    return s;
  }

  StmtPtr free_stmt() {
    auto s = make_stmt(Stmt::Kind::Free);
    take();
    if (in_kernel())
      error(FK::Semantic, s->loc, "cudaFree is only allowed in host code");
    expect(K::LParen);
    const Token& name = expect(K::Ident, "pointer name");
    DeclId id = lookup(name.text);
    if (id == kNoDecl)
      error(FK::Name, name.loc, "use of undeclared identifier '" + name.text + "'");
    if (ast_.decl(id).kind != DeclKind::Pointer)
      error(FK::Type, name.loc, "cudaFree of non-pointer '" + name.text + "'");
    s->decl = id;
    s->name = name.text;
    expect(K::RParen);
    expect(K::Semi);
    return s;
  }

  // ---- conditions ----
  Condition condition() {
    Condition c;
    do {
      comparison_group(c);
    } while (accept(K::AndAnd));
    return c;
  }

  void comparison_group(Condition& c) {
    if (at(K::LParen)) {
      // Either a parenthesized condition or an expression starting with '('.
      std::size_t save = pos_;
      std::size_t decls = ast_.decls.size();
      try {
        take();
        Condition inner = condition();
        expect(K::RParen);
        if (!at(K::AndAnd) && !at(K::RParen))
          throw FrontendError(FK::Syntax, cur().loc, "not a parenthesized condition");
        for (auto& cmp : inner)
          c.push_back(std::move(cmp));
        return;
      } catch (const FrontendError&) {
        pos_ = save;
        ast_.decls.resize(decls);
      }
    }
    Comparison cmp;
    cmp.loc = cur().loc;
    cmp.lhs = expr();
    switch (cur().kind) {
    case K::Less: cmp.op = RelOp::Lt; break;
    case K::LessEq: cmp.op = RelOp::Le; break;
    case K::Greater: cmp.op = RelOp::Gt; break;
    case K::GreaterEq: cmp.op = RelOp::Ge; break;
    case K::EqEq: cmp.op = RelOp::Eq; break;
    case K::NotEq: cmp.op = RelOp::Ne; break;
    default: fail_syntax("expected a comparison operator");
    }
    take();
    cmp.rhs = expr();
    require_integral(*cmp.lhs, "comparison operand");
    require_integral(*cmp.rhs, "comparison operand");
    c.push_back(std::move(cmp));
  }

  // ---- expressions ----
  ExprPtr make_expr(Expr::Kind kind, SourceLocation loc) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->loc = std::move(loc);
    return e;
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    while (at(K::Plus) || at(K::Minus)) {
      BinaryOp op = at(K::Plus) ? BinaryOp::Add : BinaryOp::Sub;
      take();
      lhs = binary(op, std::move(lhs), term());
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (at(K::Star) || at(K::Slash) || at(K::Percent)) {
      BinaryOp op = at(K::Star) ? BinaryOp::Mul : at(K::Slash) ? BinaryOp::Div : BinaryOp::Mod;
      take();
      lhs = binary(op, std::move(lhs), unary());
    }
    return lhs;
  }

  ExprPtr binary(BinaryOp op, ExprPtr l, ExprPtr r) {
    require_scalar(*l, std::string("operand of '") + binary_op_symbol(op) + "'");
    require_scalar(*r, std::string("operand of '") + binary_op_symbol(op) + "'");
    if (op == BinaryOp::Mod) {
      require_integral(*l, "operand of '%'");
      require_integral(*r, "operand of '%'");
    }
    auto e = make_expr(Expr::Kind::Binary, l->loc);
    e->op = op;
    e->args.push_back(std::move(l));
    e->args.push_back(std::move(r));
    return e;
  }

  ExprPtr unary() {
    if (at(K::Minus)) {
      auto e = make_expr(Expr::Kind::Neg, take().loc);
      ExprPtr inner = unary();
      require_scalar(*inner, "operand of unary '-'");
      e->args.push_back(std::move(inner));
      return e;
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = cur();
    switch (t.kind) {
    case K::IntLit: {
      auto e = make_expr(Expr::Kind::IntLit, t.loc);
      e->int_value = t.int_value;
      e->text = t.text;
      take();
      return e;
    }
    case K::FloatLit: {
      auto e = make_expr(Expr::Kind::FloatLit, t.loc);
      e->float_value = t.float_value;
      e->text = t.text;
      take();
      return e;
    }
    case K::LParen: {
      take();
      ExprPtr e = expr();
      expect(K::RParen);
      return e;
    }
    case K::KwInput: {
      auto e = make_expr(Expr::Kind::Input, t.loc);
      if (in_kernel())
        error(FK::Semantic, t.loc, "__input() is only allowed in host code");
      take();
      expect(K::LParen);
      expect(K::RParen);
      return e;
    }
    case K::KwAtomicMin: case K::KwAtomicMax: case K::KwAtomicAdd:
      return atomic();
    case K::Ident: {
      const Token& name = take();
      if (in_kernel() && is_builtin_base(name.text))
        return builtin(name);
      if (at(K::LBracket))
        return index_expr(name);
      DeclId id = lookup(name.text);
      if (id == kNoDecl)
        error(FK::Name, name.loc, "use of undeclared identifier '" + name.text + "'");
      auto e = make_expr(Expr::Kind::Var, name.loc);
      e->text = name.text;
      e->decl = id;
      return e;
    }
    default:
      fail_syntax("expected an expression");
    }
  }

  ExprPtr builtin(const Token& base) {
    expect(K::Dot, "'.' after builtin");
    const Token& axis = expect(K::Ident, "axis x, y or z");
    int a = axis.text == "x" ? 0 : axis.text == "y" ? 1 : axis.text == "z" ? 2 : -1;
    if (a < 0)
      error(FK::Syntax, axis.loc, "expected axis x, y or z, found '" + axis.text + "'");
    int group = base.text == "threadIdx" ? 0 : base.text == "blockIdx" ? 1
              : base.text == "blockDim" ? 2 : 3;
    auto e = make_expr(Expr::Kind::Builtin, base.loc);
    e->builtin = static_cast<BuiltinKind>(group * 3 + a);
    return e;
  }

  ExprPtr index_expr(const Token& name) {
    DeclId id = lookup(name.text);
    if (id == kNoDecl)
      error(FK::Name, name.loc, "use of undeclared identifier '" + name.text + "'");
    const Decl& d = ast_.decl(id);
    if (d.kind == DeclKind::Scalar)
      error(FK::Type, name.loc, "subscripted value '" + name.text + "' is not an array or pointer");
    auto e = make_expr(Expr::Kind::Index, name.loc);
    e->text = name.text;
    e->decl = id;
    while (accept(K::LBracket)) {
      ExprPtr sub = expr();
      require_integral(*sub, "array subscript");
      e->args.push_back(std::move(sub));
      expect(K::RBracket);
    }
    std::size_t want = d.kind == DeclKind::Array && !d.dims.empty() ? d.dims.size() : 1;
    if (e->args.size() != want)
      error(FK::Semantic, name.loc,
            "'" + name.text + "' takes " + std::to_string(want) + " subscript(s), got " +
                std::to_string(e->args.size()));
    return e;
  }

  ExprPtr atomic() {
    const Token& t = take();
    if (!in_kernel())
      error(FK::Semantic, t.loc, "atomics are only allowed in kernels");
    auto e = make_expr(Expr::Kind::Atomic, t.loc);
    e->atomic = t.kind == K::KwAtomicMin ? AtomicOp::Min
              : t.kind == K::KwAtomicMax ? AtomicOp::Max : AtomicOp::Add;
    expect(K::LParen);
    expect(K::Amp, "'&' (atomics take the address of an element)");
    const Token& name = expect(K::Ident, "array name");
    ExprPtr target = index_expr(name);
    e->decl = target->decl;
    e->text = name.text;
    expect(K::Comma);
    ExprPtr value = expr();
    require_scalar(*value, "atomic operand");
    if (is_integral(ast_.decl(target->decl).elem))
      require_integral(*value, "atomic operand");
    expect(K::RParen);
    e->args.push_back(std::move(target));
    e->args.push_back(std::move(value));
    return e;
  }

  // ---- type checks ----
  void require_scalar(const Expr& e, const std::string& what) const {
    if (e.kind == Expr::Kind::Var && ast_.decl(e.decl).kind != DeclKind::Scalar)
      error(FK::Type, e.loc, what + ": '" + e.text + "' is not a scalar value");
  }

  void require_integral(const Expr& e, const std::string& what) const {
    require_scalar(e, what);
    if (!is_integral(expr_type(ast_, e)))
      error(FK::Type, e.loc, what + " must be an integer expression");
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  Ast ast_;
  int function_ = -1;
  int depth_ = 0;
  int loop_depth_ = 0;
  std::vector<std::unordered_map<std::string, DeclId>> scopes_;
};

} // namespace

Ast parse_program(const std::vector<Token>& tokens) { return Parser(tokens).run(); }

Ast parse_source(std::string_view source, const std::string& file) {
  return parse_program(tokenize(source, file));
}

Ast parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw FrontendError(FK::Io, SourceLocation{path, 1, 1}, "cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_source(buf.str(), path);
}

} // namespace scuba
