#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "scuba/ast.hpp"

namespace scuba {

/// Closed integer interval. Bounds at or beyond +-kInfinity mean unbounded.
struct Interval {
  static constexpr std::int64_t kInfinity = std::int64_t{1} << 62;
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  bool empty() const { return lo > hi; }
  bool fixed() const { return lo == hi; }
  bool contains(std::int64_t v) const { return lo <= v && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

using NodeId = int;

struct ExprNode {
  enum class Op { Const, Var, Add, Sub, Mul, Div, Mod };
  Op op = Op::Const;
  std::int64_t value = 0;  // Const
  int var = -1;            // Var
  NodeId lhs = -1;
  NodeId rhs = -1;
};

struct SolverVar {
  std::string name;
  Interval domain;
};

struct Constraint {
  RelOp rel = RelOp::Eq;
  NodeId lhs = -1;
  NodeId rhs = -1;
  int kind = 3;            // 1 identifier bound, 2 the OOB inequality, 3 program relation
  std::string origin;
};

/// Integer constraints over bounded variables. Expression nodes are
/// hash-consed and children always precede their parents.
class ConstraintSet {
public:
  int add_var(const std::string& name, Interval domain);
  std::optional<int> find_var(const std::string& name) const;

  NodeId constant(std::int64_t value);
  NodeId var(int index);
  NodeId binop(BinaryOp op, NodeId lhs, NodeId rhs);
  void add(RelOp rel, NodeId lhs, NodeId rhs, int kind = 3, std::string origin = {});

  const std::vector<SolverVar>& vars() const { return vars_; }
  std::vector<SolverVar>& vars() { return vars_; }
  const std::vector<ExprNode>& nodes() const { return nodes_; }
  const ExprNode& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  std::string node_to_string(NodeId id) const;
  /// SMT-LIB flavoured dump: declarations, bounds, assertions.
  std::string to_text() const;

private:
  NodeId intern(const ExprNode& node);

  std::vector<SolverVar> vars_;
  std::map<std::string, int> var_index_;
  std::vector<ExprNode> nodes_;
  std::map<std::tuple<int, std::int64_t, int, int, int>, NodeId> interned_;
  std::vector<Constraint> constraints_;
};

/// Exact value of a node under a full assignment. Empty when a division or
/// modulo has a divisor below 1 (not a legal execution).
std::optional<std::int64_t> evaluate(const ConstraintSet& set, NodeId node,
                                     const std::vector<std::int64_t>& model);
/// Exact truth of a constraint; false when evaluation is undefined or overflows.
bool satisfied(const ConstraintSet& set, const Constraint& c, const std::vector<std::int64_t>& model);

/// Narrows domains to a fixpoint of interval reasoning over every
/// constraint. Returns false on contradiction. `stagnated` is set when the
/// round cap stopped the loop before a fixpoint.
bool propagate(const ConstraintSet& set, std::vector<Interval>& domains, bool* stagnated = nullptr);

struct Verdict {
  enum class Kind { Unsat, Sat, Timeout };
  Kind kind = Kind::Unsat;
  std::vector<std::int64_t> model;  // Sat: one value per variable
  double elapsed_seconds = 0;
  std::uint64_t nodes = 0;

  std::map<std::string, std::int64_t> named_model(const ConstraintSet& set) const;
};

const char* verdict_name(Verdict::Kind kind);

struct SolverOptions {
  double timeout_seconds = 30;
  /// Tie-break permutation for branching; nullopt keeps variable order.
  std::optional<std::uint64_t> seed;
  bool use_lp = true;
};

/// Complete depth-first search over the bounded domains: propagate, prune
/// with the linear relaxation, branch on the smallest unfixed domain at its
/// midpoint, low half first.
Verdict solve(const ConstraintSet& set, const SolverOptions& options = {});

/// Seed from SCUBA_MINI_SEED, if set and numeric.
std::optional<std::uint64_t> seed_from_environment();

} // namespace scuba
