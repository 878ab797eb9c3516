#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "scuba/ir.hpp"

namespace scuba {

enum class EtKind { Const, Unknown, Builtin, LoopVar, BinOp };

/// Where an Unknown leaf comes from.
enum class UnknownOrigin { Input, Load, Param };
const char* unknown_origin_name(UnknownOrigin origin);

struct Et;
using EtPtr = std::shared_ptr<const Et>;

/// Immutable expression tree node. Subtrees are shared.
struct Et {
  EtKind kind = EtKind::Const;
  std::int64_t value = 0;                    // Const
  ValueId tag = kNoValue;                    // Unknown, LoopVar
  std::string name;                          // Unknown, LoopVar: source name (may be empty)
  UnknownOrigin origin = UnknownOrigin::Input;
  SourceLocation loc;                        // Unknown, LoopVar: defining site
  BuiltinKind builtin = BuiltinKind::TidX;   // Builtin
  BinaryOp op = BinaryOp::Add;               // BinOp
  EtPtr lhs;                                 // BinOp left, LoopVar lower bound
  EtPtr rhs;                                 // BinOp right, LoopVar upper bound (exclusive)
};

EtPtr et_const(std::int64_t value);
EtPtr et_unknown(ValueId tag, std::string name, UnknownOrigin origin, SourceLocation loc = {});
EtPtr et_builtin(BuiltinKind kind);
EtPtr et_loop_var(ValueId tag, std::string name, EtPtr lower, EtPtr upper, SourceLocation loc = {});
EtPtr et_binop(BinaryOp op, EtPtr lhs, EtPtr rhs);

/// A comparison between two trees; assert conditions and path guards.
struct EtCond {
  RelOp op = RelOp::Lt;
  EtPtr lhs;
  EtPtr rhs;
};

bool et_equal(const Et& a, const Et& b);
bool et_cond_equal(const EtCond& a, const EtCond& b);

/// Prefix rendering, e.g. `(* unknown:multiples 512)`.
std::string et_to_string(const Et& et);
std::string et_cond_to_string(const EtCond& c);
/// Display name of a leaf tag: the source name, or `%<id>`.
std::string et_leaf_name(const Et& et);

/// Raised when a value's definition has no expression-tree rule.
class UnsupportedStatementError : public std::runtime_error {
public:
  UnsupportedStatementError(const std::string& kind, SourceLocation loc);
  const SourceLocation& location() const { return loc_; }

private:
  SourceLocation loc_;
};

/// Raised by canonicalize when a constant exceeds the bound.
class EtOverflowError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Memoizing builder for the values of one function. Scalar kernel parameters
/// can be bound to trees from a launch site; unbound ones become Unknown leaves.
class EtBuilder {
public:
  explicit EtBuilder(const IrModule& module, std::map<ValueId, EtPtr> param_bindings = {});

  EtPtr create(ValueId value);
  EtCond create(const IrCond& cond);

private:
  const IrModule& module_;
  std::map<ValueId, EtPtr> bindings_;
  std::unordered_map<ValueId, EtPtr> memo_;
};

/// create_et without parameter bindings.
EtPtr create_et(ValueId value, const IrModule& module);

/// Folds constant subtrees and the identities x*1, 1*x, x+0, 0+x, x-0, x/1.
/// Throws EtOverflowError when a constant exceeds bound in absolute value.
/// Subtractions that would fold to a negative value and divisions by a
/// constant zero are left unfolded.
EtPtr canonicalize(const EtPtr& et, std::int64_t bound);
EtCond canonicalize(const EtCond& cond, std::int64_t bound);

} // namespace scuba
