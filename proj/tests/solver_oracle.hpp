#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "scuba/solver.hpp"

namespace scuba::test {

// Exact evaluation independent of the library: __int128 with truncating
// division, empty for a divisor below 1.
inline std::optional<__int128> eval_node(const ConstraintSet& s, NodeId id, const std::vector<std::int64_t>& m) {
  const ExprNode& n = s.node(id);
  switch (n.op) {
  case ExprNode::Op::Const: return n.value;
  case ExprNode::Op::Var: return m.at(static_cast<std::size_t>(n.var));
  default: break;
  }
  auto l = eval_node(s, n.lhs, m), r = eval_node(s, n.rhs, m);
  if (!l || !r)
    return std::nullopt;
  switch (n.op) {
  case ExprNode::Op::Add: return *l + *r;
  case ExprNode::Op::Sub: return *l - *r;
  case ExprNode::Op::Mul: return *l * *r;
  case ExprNode::Op::Div: return *r < 1 ? std::nullopt : std::optional<__int128>(*l / *r);
  case ExprNode::Op::Mod: return *r < 1 ? std::nullopt : std::optional<__int128>(*l % *r);
  default: return std::nullopt;
  }
}

inline bool holds(const ConstraintSet& s, const std::vector<std::int64_t>& m) {
  for (const auto& c : s.constraints()) {
    auto l = eval_node(s, c.lhs, m), r = eval_node(s, c.rhs, m);
    if (!l || !r)
      return false;
    bool ok = false;
    switch (c.rel) {
    case RelOp::Lt: ok = *l < *r; break;
    case RelOp::Le: ok = *l <= *r; break;
    case RelOp::Gt: ok = *l > *r; break;
    case RelOp::Ge: ok = *l >= *r; break;
    case RelOp::Eq: ok = *l == *r; break;
    case RelOp::Ne: ok = *l != *r; break;
    }
    if (!ok)
      return false;
  }
  return true;
}

inline bool in_domains(const ConstraintSet& s, const std::vector<std::int64_t>& m) {
  if (m.size() != s.vars().size())
    return false;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!s.vars()[i].domain.contains(m[i]))
      return false;
  return true;
}

/// Sat iff some assignment inside the domains satisfies every constraint.
inline bool enumerate_sat(const ConstraintSet& s) {
  std::vector<std::int64_t> m;
  for (const auto& v : s.vars())
    m.push_back(v.domain.lo);
  for (;;) {
    if (holds(s, m))
      return true;
    std::size_t i = 0;
    while (i < m.size() && m[i] == s.vars()[i].domain.hi) {
      m[i] = s.vars()[i].domain.lo;
      ++i;
    }
    if (i == m.size())
      return false;
    ++m[i];
  }
}

inline NodeId random_expr(ConstraintSet& s, std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 6 : 1);
  int nv = static_cast<int>(s.vars().size());
  switch (pick(rng)) {
  case 0: return s.constant(std::uniform_int_distribution<int>(-6, 12)(rng));
  case 1: return s.var(std::uniform_int_distribution<int>(0, nv - 1)(rng));
  default: {
    static constexpr BinaryOp ops[] = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div,
                                       BinaryOp::Mod, BinaryOp::Add, BinaryOp::Mul};
    BinaryOp op = ops[std::uniform_int_distribution<int>(0, 6)(rng)];
    NodeId a = random_expr(s, rng, depth - 1);
    NodeId b = random_expr(s, rng, depth - 1);
    return s.binop(op, a, b);
  }
  }
}

/// Up to four variables with domains of at most 32 values and one to four constraints.
inline ConstraintSet random_set(std::mt19937_64& rng, std::int64_t max_width = 31, bool signed_domains = true) {
  ConstraintSet s;
  int nv = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int i = 0; i < nv; ++i) {
    std::int64_t lo = signed_domains ? std::uniform_int_distribution<int>(-10, 10)(rng) : 0;
    std::int64_t w = std::uniform_int_distribution<std::int64_t>(0, max_width)(rng);
    s.add_var("x" + std::to_string(i), Interval{lo, lo + w});
  }
  int nc = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int i = 0; i < nc; ++i) {
    auto rel = static_cast<RelOp>(std::uniform_int_distribution<int>(0, 5)(rng));
    NodeId l = random_expr(s, rng, 2);
    NodeId r = random_expr(s, rng, 2);
    s.add(rel, l, r);
  }
  return s;
}

} // namespace scuba::test
