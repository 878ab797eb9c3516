#include "scuba/lowering.hpp"

#include <map>

namespace scuba {

namespace {

bool has_load(const Expr& e) {
  if (e.kind == Expr::Kind::Index || e.kind == Expr::Kind::Atomic)
    return true;
  for (const auto& a : e.args)
    if (has_load(*a))
      return true;
  return false;
}

bool may_return(const std::vector<StmtPtr>& list);

bool may_return(const Stmt& s) {
  switch (s.kind) {
  case Stmt::Kind::Return: return true;
  case Stmt::Kind::Block: return may_return(s.body);
  case Stmt::Kind::If: return may_return(s.body) || may_return(s.else_body);
  default: return false;
  }
}

bool may_return(const std::vector<StmtPtr>& list) {
  for (const auto& s : list)
    if (may_return(*s))
      return true;
  return false;
}

class Lowerer {
public:
  explicit Lowerer(const Ast& ast) : ast_(ast), decl_value_(ast.decls.size(), kNoValue) {
    mod_.file = ast.file;
  }

  IrModule run() {
    for (std::size_t k = 0; k < ast_.kernels.size(); ++k) {
      const Kernel& kern = ast_.kernels[k];
      function_ = static_cast<int>(k);
      mod_.kernels.push_back(IrFunction{kern.name, {}, {}});
      for (DeclId p : kern.params) {
        const Decl& d = ast_.decl(p);
        ValueInfo v;
        v.name = d.name;
        v.kind = d.kind == DeclKind::Pointer ? ValueKind::Pointer : ValueKind::Scalar;
        v.elem = d.elem;
        v.space = d.kind == DeclKind::Pointer ? Space::Global : Space::Local;
        v.loc = d.loc;
        v.function = function_;
        v.param_index = d.param_index;
        v.decl = p;
        ValueId id = add_value(std::move(v));
        decl_value_[static_cast<std::size_t>(p)] = id;
        current().params.push_back(id);
      }
      run_list(kern.body);
    }
    function_ = -1;
    mod_.host.name = "main";
    run_list(ast_.host_main);
    return std::move(mod_);
  }

private:
  struct Frame {
    const std::vector<StmtPtr>* list;
    std::size_t next;
  };

  IrFunction& current() {
    return function_ < 0 ? mod_.host : mod_.kernels[static_cast<std::size_t>(function_)];
  }

  ValueId add_value(ValueInfo v) {
    ValueId id = static_cast<ValueId>(mod_.values.size());
    mod_.values.push_back(std::move(v));
    return id;
  }

  // Emits st, giving it a fresh result of the given shape when kind is not null.
  ValueId emit(IrStmt st, const ValueInfo* shape = nullptr) {
    int index = static_cast<int>(current().stmts.size());
    if (shape) {
      ValueInfo v = *shape;
      v.function = function_;
      v.def_stmt = index;
      if (v.loc.file.empty())
        v.loc = st.loc;
      v.name = st.name;
      st.result = add_value(std::move(v));
    }
    ValueId r = st.result;
    current().stmts.push_back(std::move(st));
    return r;
  }

  ValueId scalar(IrStmt st, ScalarType elem = ScalarType::Int) {
    ValueInfo v;
    v.kind = ValueKind::Scalar;
    v.elem = elem;
    v.space = function_ < 0 ? Space::Host : Space::Local;
    return emit(std::move(st), &v);
  }

  static IrStmt make(IrKind kind, const SourceLocation& loc) {
    IrStmt st;
    st.kind = kind;
    st.loc = loc;
    return st;
  }

  ValueId value_of(DeclId d, const SourceLocation& loc) {
    if (d == kNoDecl || decl_value_[static_cast<std::size_t>(d)] == kNoValue)
      throw InternalError(loc.str() + ": operand has no lowered definition");
    return decl_value_[static_cast<std::size_t>(d)];
  }

  void rename(ValueId id, const std::string& name, DeclId decl) {
    auto& v = mod_.values[static_cast<std::size_t>(id)];
    v.name = name;
    v.decl = decl;
    current().stmts[static_cast<std::size_t>(v.def_stmt)].name = name;
  }

  ValueId constant(std::int64_t value, const SourceLocation& loc) {
    IrStmt st = make(IrKind::ConstDef, loc);
    st.literal = value;
    return scalar(std::move(st));
  }

  // ---- expressions ----
  ValueId expr(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::IntLit: return constant(e.int_value, e.loc);
    case Expr::Kind::FloatLit: {
      IrStmt st = make(IrKind::ConstDef, e.loc);
      st.is_float = true;
      st.float_literal = e.float_value;
      return scalar(std::move(st), ScalarType::Double);
    }
    case Expr::Kind::Var: return value_of(e.decl, e.loc);
    case Expr::Kind::Builtin: {
      IrStmt st = make(IrKind::BuiltinDef, e.loc);
      st.builtin = e.builtin;
      return scalar(std::move(st));
    }
    case Expr::Kind::Input: {
      IrStmt st = make(IrKind::InputDef, e.loc);
      st.input_index = input_count_++;
      return scalar(std::move(st));
    }
    case Expr::Kind::Binary: {
      ValueId l = expr(*e.args[0]);
      ValueId r = expr(*e.args[1]);
      IrStmt st = make(IrKind::BinOpDef, e.loc);
      st.op = e.op;
      st.operands = {l, r};
      return scalar(std::move(st), expr_type(ast_, e));
    }
    case Expr::Kind::Neg: {
      ValueId zero = constant(0, e.loc);
      ValueId v = expr(*e.args[0]);
      IrStmt st = make(IrKind::BinOpDef, e.loc);
      st.op = BinaryOp::Sub;
      st.operands = {zero, v};
      return scalar(std::move(st), expr_type(ast_, e));
    }
    case Expr::Kind::Index: {
      auto [target, offset] = access(e, AccessKind::Read, kNoValue, false);
      IrStmt st = make(IrKind::LoadValueDef, e.loc);
      st.operands = {target, offset};
      return scalar(std::move(st), ast_.decl(e.decl).elem);
    }
    case Expr::Kind::Atomic: {
      const Expr& target_expr = *e.args[0];
      // Address first, then the operand, matching argument order.
      std::vector<ValueId> subs = subscripts(target_expr);
      ValueId value = expr(*e.args[1]);
      ValueId target = value_of(target_expr.decl, target_expr.loc);
      ValueId offset = linearize(target_expr, subs);
      IrStmt acc = make(IrKind::MemAccess, target_expr.loc);
      acc.access = AccessKind::ReadWrite;
      acc.atomic = true;
      acc.operands = {target, offset, value};
      emit(std::move(acc));
      IrStmt st = make(IrKind::LoadValueDef, e.loc);
      st.operands = {target, offset};
      return scalar(std::move(st), ast_.decl(target_expr.decl).elem);
    }
    }
    throw InternalError(e.loc.str() + ": unknown expression kind");
  }

  std::vector<ValueId> subscripts(const Expr& index) {
    std::vector<ValueId> subs;
    for (const auto& a : index.args)
      subs.push_back(expr(*a));
    return subs;
  }

  ValueId linearize(const Expr& index, const std::vector<ValueId>& subs) {
    if (subs.size() == 1)
      return subs[0];
    auto it = extents_.find(index.decl);
    if (it == extents_.end())
      throw InternalError(index.loc.str() + ": multi-dimensional access without extents");
    const std::vector<ValueId>& dims = it->second;
    ValueId acc = subs[0];
    for (std::size_t k = 1; k < subs.size(); ++k) {
      IrStmt mul = make(IrKind::BinOpDef, index.loc);
      mul.op = BinaryOp::Mul;
      mul.operands = {acc, dims[k]};
      ValueId m = scalar(std::move(mul));
      IrStmt add = make(IrKind::BinOpDef, index.loc);
      add.op = BinaryOp::Add;
      add.operands = {m, subs[k]};
      acc = scalar(std::move(add));
    }
    return acc;
  }

  std::pair<ValueId, ValueId> access(const Expr& index, AccessKind kind, ValueId stored,
                                     bool emit_value) {
    std::vector<ValueId> subs = subscripts(index);
    ValueId target = value_of(index.decl, index.loc);
    ValueId offset = linearize(index, subs);
    IrStmt st = make(IrKind::MemAccess, index.loc);
    st.access = kind;
    st.operands = {target, offset};
    if (emit_value)
      st.operands.push_back(stored);
    emit(std::move(st));
    return {target, offset};
  }

  std::vector<IrCond> conds(const Condition& c) {
    std::vector<IrCond> out;
    for (const auto& cmp : c)
      out.push_back(IrCond{cmp.op, expr(*cmp.lhs), expr(*cmp.rhs)});
    return out;
  }

  // ---- statements ----
  void run_list(const std::vector<StmtPtr>& list) { run({Frame{&list, 0}}); }

  // Lowers the statements left in stack (innermost frame last). A conditional
  // that may return takes the remaining statements into each of its arms.
  void run(std::vector<Frame> stack) {
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next >= f.list->size()) {
        stack.pop_back();
        continue;
      }
      const Stmt& s = *(*f.list)[f.next++];
      switch (s.kind) {
      case Stmt::Kind::Return:
        return;
      case Stmt::Kind::Block:
        stack.push_back(Frame{&s.body, 0});
        continue;
      case Stmt::Kind::If:
        if (may_return(s)) {
          branch_begin(s.cond, s.loc);
          std::vector<Frame> then_stack = stack;
          then_stack.push_back(Frame{&s.body, 0});
          run(std::move(then_stack));
          emit(make(IrKind::BranchElse, s.loc));
          std::vector<Frame> else_stack = stack;
          else_stack.push_back(Frame{&s.else_body, 0});
          run(std::move(else_stack));
          emit(make(IrKind::BranchEnd, s.loc));
          return;
        }
        if_stmt(s);
        continue;
      default:
        simple(s);
      }
    }
  }

  void branch_begin(const Condition& c, const SourceLocation& loc) {
    IrStmt st = make(IrKind::BranchBegin, loc);
    st.conds = conds(c);
    if (st.conds.size() == 1)
      st.else_conds = {IrCond{negate(st.conds[0].op), st.conds[0].lhs, st.conds[0].rhs}};
    emit(std::move(st));
  }

  void if_stmt(const Stmt& s) {
    bool nest = !s.has_else && s.cond.size() > 1;
    if (nest) {
      nest = false;
      for (std::size_t i = 1; i < s.cond.size(); ++i)
        nest = nest || has_load(*s.cond[i].lhs) || has_load(*s.cond[i].rhs);
    }
    if (nest) {
      // Later comparisons only evaluate when the earlier ones hold.
      for (const auto& cmp : s.cond) {
        IrStmt st = make(IrKind::BranchBegin, cmp.loc);
        st.conds = {IrCond{cmp.op, expr(*cmp.lhs), expr(*cmp.rhs)}};
        st.else_conds = {IrCond{negate(cmp.op), st.conds[0].lhs, st.conds[0].rhs}};
        emit(std::move(st));
      }
      run_list(s.body);
      for (std::size_t i = 0; i < s.cond.size(); ++i) {
        emit(make(IrKind::BranchElse, s.loc));
        emit(make(IrKind::BranchEnd, s.loc));
      }
      return;
    }
    branch_begin(s.cond, s.loc);
    run_list(s.body);
    emit(make(IrKind::BranchElse, s.loc));
    run_list(s.else_body);
    emit(make(IrKind::BranchEnd, s.loc));
  }

  void simple(const Stmt& s) {
    switch (s.kind) {
    case Stmt::Kind::Decl: decl(s); break;
    case Stmt::Kind::Store: {
      ValueId v = expr(*s.value);
      access(*s.expr, s.compound ? AccessKind::ReadWrite : AccessKind::Write, v, true);
      break;
    }
    case Stmt::Kind::Free: {
      IrStmt st = make(IrKind::HostFree, s.loc);
      st.operands = {value_of(s.decl, s.loc)};
      emit(std::move(st));
      break;
    }
    case Stmt::Kind::Launch: launch(s); break;
    case Stmt::Kind::Assert: {
      IrStmt st = make(IrKind::Assert, s.loc);
      st.conds = conds(s.cond);
      emit(std::move(st));
      break;
    }
    case Stmt::Kind::For: loop(s); break;
    case Stmt::Kind::ExprStmt: expr(*s.expr); break;
    default:
      throw InternalError(s.loc.str() + ": unexpected statement in lowering");
    }
  }

  void launch(const Stmt& s) {
    IrStmt st = make(IrKind::Launch, s.loc);
    st.callee = s.name;
    st.kernel = s.kernel;
    for (const auto& c : s.grid.comps)
      st.grid.push_back(expr(*c));
    for (const auto& c : s.block.comps)
      st.block.push_back(expr(*c));
    if (s.shm)
      st.dyn_shm = expr(*s.shm);
    const Kernel& k = ast_.kernels[static_cast<std::size_t>(s.kernel)];
    for (std::size_t i = 0; i < s.args.size(); ++i) {
      const Decl& p = ast_.decl(k.params[i]);
      if (p.kind == DeclKind::Pointer)
        st.operands.push_back(value_of(s.args[i]->decl, s.args[i]->loc));
      else
        st.operands.push_back(expr(*s.args[i]));
    }
    emit(std::move(st));
  }

  void loop(const Stmt& s) {
    ValueId lo = expr(*s.expr);
    ValueId hi = expr(*s.value);
    if (s.inclusive) {
      ValueId one = constant(1, s.value->loc);
      IrStmt add = make(IrKind::BinOpDef, s.value->loc);
      add.op = BinaryOp::Add;
      add.operands = {hi, one};
      hi = scalar(std::move(add));
    }
    const Decl& d = ast_.decl(s.decl);
    IrStmt begin = make(IrKind::LoopBegin, s.loc);
    begin.operands = {lo, hi};
    begin.name = d.name;
    ValueId var = scalar(std::move(begin));
    mod_.values[static_cast<std::size_t>(var)].decl = s.decl;
    mod_.values[static_cast<std::size_t>(var)].loc = d.loc;
    decl_value_[static_cast<std::size_t>(s.decl)] = var;
    run_list(s.body);
    IrStmt end = make(IrKind::LoopEnd, s.loc);
    end.operands = {var};
    emit(std::move(end));
  }

  void decl(const Stmt& s) {
    const Decl& d = ast_.decl(s.decl);
    ValueId result = kNoValue;
    switch (d.kind) {
    case DeclKind::Scalar: {
      if (s.expr->kind == Expr::Kind::Var) {
        IrStmt st = make(IrKind::CopyDef, s.loc);
        st.operands = {value_of(s.expr->decl, s.expr->loc)};
        st.name = d.name;
        result = scalar(std::move(st), d.elem);
      } else {
        result = expr(*s.expr);
        rename(result, d.name, s.decl);
      }
      break;
    }
    case DeclKind::Pointer: {
      ValueInfo shape;
      shape.kind = ValueKind::Pointer;
      shape.elem = d.elem;
      shape.loc = d.loc;
      shape.decl = s.decl;
      switch (s.init) {
      case Stmt::Init::Malloc: {
        ValueId size = expr(*s.expr);
        IrStmt st = make(IrKind::HostAlloc, s.loc);
        st.operands = {size};
        st.name = d.name;
        shape.space = Space::Global;
        result = emit(std::move(st), &shape);
        break;
      }
      case Stmt::Init::AddrOf: {
        const Expr& index = *s.expr;
        std::vector<ValueId> subs = subscripts(index);
        ValueId base = value_of(index.decl, index.loc);
        ValueId offset = linearize(index, subs);
        IrStmt st = make(IrKind::SubIndex, s.loc);
        st.operands = {base, offset};
        st.name = d.name;
        shape.space = mod_.value(base).space;
        result = emit(std::move(st), &shape);
        break;
      }
      case Stmt::Init::Expr: {
        ValueId src = value_of(s.expr->decl, s.expr->loc);
        IrStmt st = make(IrKind::CopyDef, s.loc);
        st.operands = {src};
        st.name = d.name;
        shape.space = mod_.value(src).space;
        result = emit(std::move(st), &shape);
        break;
      }
      case Stmt::Init::None: {
        IrStmt st = make(IrKind::InputDef, s.loc);
        st.opaque = true;
        st.name = d.name;
        shape.space = Space::Global;
        result = emit(std::move(st), &shape);
        break;
      }
      }
      break;
    }
    case DeclKind::Array: {
      ValueInfo shape;
      shape.kind = ValueKind::Array;
      shape.elem = d.elem;
      shape.loc = d.loc;
      shape.decl = s.decl;
      if (d.is_extern) {
        IrStmt st = make(IrKind::DynShmAlloca, s.loc);
        st.name = d.name;
        shape.space = Space::SharedDynamic;
        result = emit(std::move(st), &shape);
        break;
      }
      std::vector<ValueId> dims;
      for (const auto& e : d.dims)
        dims.push_back(expr(*e));
      ValueId size = dims[0];
      for (std::size_t k = 1; k < dims.size(); ++k) {
        IrStmt mul = make(IrKind::BinOpDef, s.loc);
        mul.op = BinaryOp::Mul;
        mul.operands = {size, dims[k]};
        size = scalar(std::move(mul));
      }
      IrStmt st = make(IrKind::StaticAlloca, s.loc);
      st.operands = {size};
      st.operands.insert(st.operands.end(), dims.begin(), dims.end());
      st.name = d.name;
      shape.space = function_ < 0 ? Space::Host : d.is_shared ? Space::SharedStatic : Space::Local;
      result = emit(std::move(st), &shape);
      extents_[s.decl] = dims;
      break;
    }
    }
    decl_value_[static_cast<std::size_t>(s.decl)] = result;
  }

  const Ast& ast_;
  IrModule mod_;
  int function_ = -1;
  int input_count_ = 0;
  std::vector<ValueId> decl_value_;
  std::map<DeclId, std::vector<ValueId>> extents_;
};

} // namespace

IrModule lower(const Ast& ast) { return Lowerer(ast).run(); }

} // namespace scuba
