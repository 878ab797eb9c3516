#include "scuba/ir.hpp"

#include <sstream>
#include <stdexcept>

namespace scuba {

const char* ir_kind_name(IrKind kind) {
  switch (kind) {
  case IrKind::ConstDef: return "ConstDef";
  case IrKind::InputDef: return "InputDef";
  case IrKind::BinOpDef: return "BinOpDef";
  case IrKind::BuiltinDef: return "BuiltinDef";
  case IrKind::HostAlloc: return "HostAlloc";
  case IrKind::HostFree: return "HostFree";
  case IrKind::Launch: return "Launch";
  case IrKind::Assert: return "Assert";
  case IrKind::StaticAlloca: return "StaticAlloca";
  case IrKind::DynShmAlloca: return "DynShmAlloca";
  case IrKind::SubIndex: return "SubIndex";
  case IrKind::MemAccess: return "MemAccess";
  case IrKind::LoopBegin: return "LoopBegin";
  case IrKind::LoopEnd: return "LoopEnd";
  case IrKind::BranchBegin: return "BranchBegin";
  case IrKind::BranchElse: return "BranchElse";
  case IrKind::BranchEnd: return "BranchEnd";
  case IrKind::LoadValueDef: return "LoadValueDef";
  case IrKind::CopyDef: return "CopyDef";
  }
  return "?";
}

const char* access_kind_name(AccessKind kind) {
  switch (kind) {
  case AccessKind::Read: return "read";
  case AccessKind::Write: return "write";
  case AccessKind::ReadWrite: return "read-write";
  }
  return "?";
}

const IrStmt* IrModule::def(ValueId id) const {
  const ValueInfo& v = value(id);
  if (v.def_stmt < 0)
    return nullptr;
  return &function(v.function).stmts.at(static_cast<std::size_t>(v.def_stmt));
}

ValueId IrModule::resolve_copy(ValueId id) const {
  for (;;) {
    const IrStmt* d = def(id);
    if (!d || d->kind != IrKind::CopyDef)
      return id;
    id = d->operands.at(0);
  }
}

int IrModule::find_kernel(const std::string& name) const {
  for (std::size_t i = 0; i < kernels.size(); ++i)
    if (kernels[i].name == name)
      return static_cast<int>(i);
  return -1;
}

ScalarType element_type_of(ValueId value, const IrModule& module) {
  if (value < 0 || static_cast<std::size_t>(value) >= module.values.size())
    throw std::invalid_argument("unknown value %" + std::to_string(value));
  const ValueInfo& v = module.value(value);
  if (v.kind == ValueKind::Scalar)
    throw std::invalid_argument("'" + (v.name.empty() ? "%" + std::to_string(value) : v.name) +
                                "' is a scalar, not a pointer or array");
  return v.elem;
}

namespace {

std::string ref(ValueId id) { return id == kNoValue ? "-" : "%" + std::to_string(id); }

std::string refs(const std::vector<ValueId>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i)
    s += (i ? ", " : "") + ref(ids[i]);
  return s;
}

std::string conds_text(const std::vector<IrCond>& cs) {
  std::string s;
  for (std::size_t i = 0; i < cs.size(); ++i)
    s += (i ? " && " : "") + ref(cs[i].lhs) + " " + rel_op_symbol(cs[i].op) + " " + ref(cs[i].rhs);
  return s;
}

} // namespace

std::string print_ir_stmt(const IrModule& module, const IrStmt& st) {
  std::ostringstream out;
  if (st.result != kNoValue)
    out << ref(st.result) << " = ";
  out << ir_kind_name(st.kind);
  switch (st.kind) {
  case IrKind::ConstDef:
    if (st.is_float)
      out << " " << st.float_literal;
    else
      out << " " << st.literal;
    break;
  case IrKind::InputDef:
    if (st.opaque)
      out << " opaque";
    else
      out << " #" << st.input_index;
    break;
  case IrKind::BinOpDef:
    out << " " << binary_op_symbol(st.op) << " " << refs(st.operands);
    break;
  case IrKind::BuiltinDef:
    out << " " << builtin_source_name(st.builtin);
    break;
  case IrKind::Launch:
    out << " " << st.callee << " grid(" << refs(st.grid) << ") block(" << refs(st.block) << ")";
    if (st.dyn_shm != kNoValue)
      out << " shm(" << ref(st.dyn_shm) << ")";
    out << " args(" << refs(st.operands) << ")";
    break;
  case IrKind::Assert:
    out << " " << conds_text(st.conds);
    break;
  case IrKind::BranchBegin:
    out << " " << conds_text(st.conds);
    break;
  case IrKind::MemAccess:
    out << " " << access_kind_name(st.access) << (st.atomic ? " atomic " : " ") << refs(st.operands);
    break;
  default:
    if (!st.operands.empty())
      out << " " << refs(st.operands);
    break;
  }
  if (!st.name.empty())
    out << " ; " << st.name;
  (void)module;
  out << " @" << st.loc.file << ":" << st.loc.line;
  return out.str();
}

std::string print_ir(const IrModule& module) {
  std::ostringstream out;
  auto function = [&](const IrFunction& f, bool kernel) {
    out << (kernel ? "kernel " : "host ") << f.name << "(" << refs(f.params) << ")\n";
    for (const auto& st : f.stmts)
      out << "  " << print_ir_stmt(module, st) << "\n";
  };
  for (const auto& k : module.kernels)
    function(k, true);
  function(module.host, false);
  return out.str();
}

} // namespace scuba
