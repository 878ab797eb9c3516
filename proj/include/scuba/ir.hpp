#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scuba/ast.hpp"

namespace scuba {

using ValueId = int;
inline constexpr ValueId kNoValue = -1;

enum class IrKind {
  ConstDef,
  InputDef,
  BinOpDef,
  BuiltinDef,
  HostAlloc,
  HostFree,
  Launch,
  Assert,
  StaticAlloca,
  DynShmAlloca,
  SubIndex,
  MemAccess,
  LoopBegin,
  LoopEnd,
  BranchBegin,
  BranchElse,
  BranchEnd,
  LoadValueDef,
  CopyDef,
};

const char* ir_kind_name(IrKind kind);

enum class AccessKind { Read, Write, ReadWrite };
const char* access_kind_name(AccessKind kind);

/// One comparison over IR values.
struct IrCond {
  RelOp op = RelOp::Lt;
  ValueId lhs = kNoValue;
  ValueId rhs = kNoValue;
};

struct IrStmt {
  IrKind kind = IrKind::ConstDef;
  ValueId result = kNoValue;
  // ConstDef: none. BinOpDef: lhs, rhs. HostAlloc: size. HostFree: pointer.
  // Launch: kernel arguments. StaticAlloca: total size, then one per extent.
  // SubIndex: base, offset. MemAccess: target, offset[, stored value].
  // LoopBegin: lower, upper (exclusive). LoadValueDef: target, offset. CopyDef: source.
  std::vector<ValueId> operands;
  std::int64_t literal = 0;       // ConstDef
  double float_literal = 0.0;     // ConstDef with is_float
  bool is_float = false;
  bool opaque = false;            // InputDef standing for an uninitialized host pointer
  int input_index = -1;           // InputDef: position among __input() sites
  BinaryOp op = BinaryOp::Add;
  BuiltinKind builtin = BuiltinKind::TidX;
  AccessKind access = AccessKind::Read;
  bool atomic = false;
  std::vector<IrCond> conds;      // Assert, BranchBegin (conjunction)
  std::vector<IrCond> else_conds; // BranchBegin: negation if it is a single comparison
  std::string callee;             // Launch
  int kernel = -1;                // Launch
  std::vector<ValueId> grid;      // Launch: 1..3 values as written
  std::vector<ValueId> block;
  ValueId dyn_shm = kNoValue;
  SourceLocation loc;
  std::string name;               // source variable bound to the result, if any
};

enum class ValueKind { Scalar, Pointer, Array };

enum class Space { Host, Global, SharedStatic, SharedDynamic, Local };

struct ValueInfo {
  std::string name;
  ValueKind kind = ValueKind::Scalar;
  ScalarType elem = ScalarType::Int;
  Space space = Space::Host;
  SourceLocation loc;
  int function = -1;              // -1 host, otherwise kernel index
  int def_stmt = -1;              // index into the function's statements, -1 for parameters
  int param_index = -1;
  DeclId decl = kNoDecl;
};

struct IrFunction {
  std::string name;
  std::vector<ValueId> params;
  std::vector<IrStmt> stmts;
};

struct IrModule {
  std::string file;
  IrFunction host;
  std::vector<IrFunction> kernels;
  std::vector<ValueInfo> values;

  const ValueInfo& value(ValueId id) const { return values.at(static_cast<std::size_t>(id)); }
  const IrFunction& function(int index) const {
    return index < 0 ? host : kernels.at(static_cast<std::size_t>(index));
  }
  /// The defining statement, or nullptr for parameters.
  const IrStmt* def(ValueId id) const;
  /// Follows CopyDef chains to the original value.
  ValueId resolve_copy(ValueId id) const;
  int find_kernel(const std::string& name) const;
};

/// Declared element type of a pointer or array value. Throws
/// std::invalid_argument for scalars.
ScalarType element_type_of(ValueId value, const IrModule& module);

/// `%<id> = <kind> <operands> @<file>:<line>` per statement.
std::string print_ir(const IrModule& module);
std::string print_ir_stmt(const IrModule& module, const IrStmt& st);

} // namespace scuba
