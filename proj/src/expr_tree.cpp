#include "scuba/expr_tree.hpp"

namespace scuba {

const char* unknown_origin_name(UnknownOrigin origin) {
  switch (origin) {
  case UnknownOrigin::Input: return "input";
  case UnknownOrigin::Load: return "load";
  case UnknownOrigin::Param: return "param";
  }
  return "?";
}

EtPtr et_const(std::int64_t value) {
  auto e = std::make_shared<Et>();
  e->kind = EtKind::Const;
  e->value = value;
  return e;
}

EtPtr et_unknown(ValueId tag, std::string name, UnknownOrigin origin, SourceLocation loc) {
  auto e = std::make_shared<Et>();
  e->kind = EtKind::Unknown;
  e->tag = tag;
  e->name = std::move(name);
  e->origin = origin;
  e->loc = std::move(loc);
  return e;
}

EtPtr et_builtin(BuiltinKind kind) {
  auto e = std::make_shared<Et>();
  e->kind = EtKind::Builtin;
  e->builtin = kind;
  return e;
}

EtPtr et_loop_var(ValueId tag, std::string name, EtPtr lower, EtPtr upper, SourceLocation loc) {
  auto e = std::make_shared<Et>();
  e->kind = EtKind::LoopVar;
  e->tag = tag;
  e->name = std::move(name);
  e->lhs = std::move(lower);
  e->rhs = std::move(upper);
  e->loc = std::move(loc);
  return e;
}

EtPtr et_binop(BinaryOp op, EtPtr lhs, EtPtr rhs) {
  auto e = std::make_shared<Et>();
  e->kind = EtKind::BinOp;
  e->op = op;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  return e;
}

bool et_equal(const Et& a, const Et& b) {
  if (&a == &b)
    return true;
  if (a.kind != b.kind)
    return false;
  switch (a.kind) {
  case EtKind::Const: return a.value == b.value;
  case EtKind::Unknown: return a.tag == b.tag && a.origin == b.origin;
  case EtKind::Builtin: return a.builtin == b.builtin;
  case EtKind::LoopVar:
    return a.tag == b.tag && et_equal(*a.lhs, *b.lhs) && et_equal(*a.rhs, *b.rhs);
  case EtKind::BinOp:
    return a.op == b.op && et_equal(*a.lhs, *b.lhs) && et_equal(*a.rhs, *b.rhs);
  }
  return false;
}

bool et_cond_equal(const EtCond& a, const EtCond& b) {
  return a.op == b.op && et_equal(*a.lhs, *b.lhs) && et_equal(*a.rhs, *b.rhs);
}

std::string et_leaf_name(const Et& et) {
  return et.name.empty() ? "%" + std::to_string(et.tag) : et.name;
}

std::string et_to_string(const Et& et) {
  switch (et.kind) {
  case EtKind::Const: return std::to_string(et.value);
  case EtKind::Unknown: return "unknown:" + et_leaf_name(et);
  case EtKind::Builtin: return builtin_source_name(et.builtin);
  case EtKind::LoopVar: return "loop:" + et_leaf_name(et);
  case EtKind::BinOp:
    return std::string("(") + binary_op_symbol(et.op) + " " + et_to_string(*et.lhs) + " " +
           et_to_string(*et.rhs) + ")";
  }
  return "?";
}

std::string et_cond_to_string(const EtCond& c) {
  return std::string("(") + rel_op_symbol(c.op) + " " + et_to_string(*c.lhs) + " " +
         et_to_string(*c.rhs) + ")";
}

UnsupportedStatementError::UnsupportedStatementError(const std::string& kind, SourceLocation loc)
    : std::runtime_error(loc.str() + ": no expression tree rule for " + kind + " statement"),
      loc_(std::move(loc)) {}

EtBuilder::EtBuilder(const IrModule& module, std::map<ValueId, EtPtr> param_bindings)
    : module_(module), bindings_(std::move(param_bindings)) {}

EtPtr EtBuilder::create(ValueId value) {
  if (auto it = memo_.find(value); it != memo_.end())
    return it->second;
  const ValueInfo& info = module_.value(value);
  const IrStmt* st = module_.def(value);
  EtPtr out;
  if (!st) {
    if (info.kind != ValueKind::Scalar)
      throw UnsupportedStatementError("pointer parameter", info.loc);
    if (auto b = bindings_.find(value); b != bindings_.end())
      out = b->second;
    else
      out = et_unknown(value, info.name, UnknownOrigin::Param, info.loc);
  } else {
    switch (st->kind) {
    case IrKind::ConstDef:
      if (st->is_float)
        throw UnsupportedStatementError("floating-point ConstDef", st->loc);
      out = et_const(st->literal);
      break;
    case IrKind::InputDef:
      if (st->opaque)
        throw UnsupportedStatementError("opaque pointer InputDef", st->loc);
      out = et_unknown(value, info.name, UnknownOrigin::Input, st->loc);
      break;
    case IrKind::LoadValueDef:
      out = et_unknown(value, info.name, UnknownOrigin::Load, st->loc);
      break;
    case IrKind::BuiltinDef:
      out = et_builtin(st->builtin);
      break;
    case IrKind::BinOpDef:
      out = et_binop(st->op, create(st->operands[0]), create(st->operands[1]));
      break;
    case IrKind::LoopBegin:
      out = et_loop_var(value, info.name, create(st->operands[0]), create(st->operands[1]),
                        info.loc);
      break;
    case IrKind::CopyDef:
      out = create(st->operands[0]);
      break;
    default:
      throw UnsupportedStatementError(ir_kind_name(st->kind), st->loc);
    }
  }
  memo_.emplace(value, out);
  return out;
}

EtCond EtBuilder::create(const IrCond& cond) {
  return EtCond{cond.op, create(cond.lhs), create(cond.rhs)};
}

EtPtr create_et(ValueId value, const IrModule& module) { return EtBuilder(module).create(value); }

namespace {

class Canonicalizer {
public:
  explicit Canonicalizer(std::int64_t bound) : bound_(bound) {}

  EtPtr run(const EtPtr& et) {
    if (auto it = memo_.find(et.get()); it != memo_.end())
      return it->second;
    EtPtr out = step(et);
    memo_.emplace(et.get(), out);
    return out;
  }

private:
  void check(std::int64_t v) const {
    if (v > bound_ || v < -bound_)
      throw EtOverflowError("constant " + std::to_string(v) + " exceeds the bound " +
                            std::to_string(bound_));
  }

  static bool is_const(const EtPtr& e, std::int64_t v) {
    return e->kind == EtKind::Const && e->value == v;
  }

  EtPtr step(const EtPtr& et) {
    switch (et->kind) {
    case EtKind::Const:
      check(et->value);
      return et;
    case EtKind::Unknown:
    case EtKind::Builtin:
      return et;
    case EtKind::LoopVar: {
      EtPtr lo = run(et->lhs);
      EtPtr hi = run(et->rhs);
      if (lo == et->lhs && hi == et->rhs)
        return et;
      return et_loop_var(et->tag, et->name, lo, hi, et->loc);
    }
    case EtKind::BinOp:
      break;
    }
    EtPtr l = run(et->lhs);
    EtPtr r = run(et->rhs);
    if (l->kind == EtKind::Const && r->kind == EtKind::Const) {
      __int128 a = l->value, b = r->value, v = 0;
      bool fold = true;
      switch (et->op) {
      case BinaryOp::Add: v = a + b; break;
      case BinaryOp::Sub: v = a - b; fold = v >= 0; break;
      case BinaryOp::Mul: v = a * b; break;
      case BinaryOp::Div: fold = b != 0; v = fold ? a / b : 0; break;
      case BinaryOp::Mod: fold = b != 0; v = fold ? a % b : 0; break;
      }
      if (fold) {
        if (v > bound_ || v < -static_cast<__int128>(bound_))
          throw EtOverflowError("folding " + et_to_string(*et) + " exceeds the bound " +
                                std::to_string(bound_));
        return et_const(static_cast<std::int64_t>(v));
      }
    }
    switch (et->op) {
    case BinaryOp::Mul:
      if (is_const(r, 1)) return l;
      if (is_const(l, 1)) return r;
      break;
    case BinaryOp::Add:
      if (is_const(r, 0)) return l;
      if (is_const(l, 0)) return r;
      break;
    case BinaryOp::Sub:
    case BinaryOp::Div:
      if (is_const(r, et->op == BinaryOp::Sub ? 0 : 1)) return l;
      break;
    case BinaryOp::Mod:
      break;
    }
    if (l == et->lhs && r == et->rhs)
      return et;
    return et_binop(et->op, l, r);
  }

  std::int64_t bound_;
  std::unordered_map<const Et*, EtPtr> memo_;
};

} // namespace

EtPtr canonicalize(const EtPtr& et, std::int64_t bound) { return Canonicalizer(bound).run(et); }

EtCond canonicalize(const EtCond& cond, std::int64_t bound) {
  Canonicalizer c(bound);
  return EtCond{cond.op, c.run(cond.lhs), c.run(cond.rhs)};
}

} // namespace scuba
