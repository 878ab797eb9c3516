#include "scuba/solver.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>

#include <gmpxx.h>

#include "lp_relaxation.hpp"

namespace scuba {

using i128 = __int128;

int ConstraintSet::add_var(const std::string& name, Interval domain) {
  if (var_index_.count(name))
    throw InternalError("duplicate solver variable " + name);
  vars_.push_back(SolverVar{name, domain});
  int index = static_cast<int>(vars_.size()) - 1;
  var_index_[name] = index;
  return index;
}

std::optional<int> ConstraintSet::find_var(const std::string& name) const {
  auto it = var_index_.find(name);
  if (it == var_index_.end())
    return std::nullopt;
  return it->second;
}

NodeId ConstraintSet::intern(const ExprNode& n) {
  auto key = std::make_tuple(static_cast<int>(n.op), n.value, n.var, n.lhs, n.rhs);
  if (auto it = interned_.find(key); it != interned_.end())
    return it->second;
  nodes_.push_back(n);
  NodeId id = static_cast<NodeId>(nodes_.size()) - 1;
  interned_.emplace(key, id);
  return id;
}

NodeId ConstraintSet::constant(std::int64_t value) {
  ExprNode n;
  n.op = ExprNode::Op::Const;
  n.value = value;
  return intern(n);
}

NodeId ConstraintSet::var(int index) {
  if (index < 0 || index >= static_cast<int>(vars_.size()))
    throw InternalError("solver variable index out of range");
  ExprNode n;
  n.op = ExprNode::Op::Var;
  n.var = index;
  return intern(n);
}

NodeId ConstraintSet::binop(BinaryOp op, NodeId lhs, NodeId rhs) {
  ExprNode n;
  switch (op) {
  case BinaryOp::Add: n.op = ExprNode::Op::Add; break;
  case BinaryOp::Sub: n.op = ExprNode::Op::Sub; break;
  case BinaryOp::Mul: n.op = ExprNode::Op::Mul; break;
  case BinaryOp::Div: n.op = ExprNode::Op::Div; break;
  case BinaryOp::Mod: n.op = ExprNode::Op::Mod; break;
  }
  n.lhs = lhs;
  n.rhs = rhs;
  return intern(n);
}

void ConstraintSet::add(RelOp rel, NodeId lhs, NodeId rhs, int kind, std::string origin) {
  constraints_.push_back(Constraint{rel, lhs, rhs, kind, std::move(origin)});
}

std::string ConstraintSet::node_to_string(NodeId id) const {
  const ExprNode& n = node(id);
  switch (n.op) {
  case ExprNode::Op::Const:
    return n.value < 0 ? "(- " + std::to_string(n.value).substr(1) + ")" : std::to_string(n.value);
  case ExprNode::Op::Var: return vars_[static_cast<std::size_t>(n.var)].name;
  case ExprNode::Op::Add: return "(+ " + node_to_string(n.lhs) + " " + node_to_string(n.rhs) + ")";
  case ExprNode::Op::Sub: return "(- " + node_to_string(n.lhs) + " " + node_to_string(n.rhs) + ")";
  case ExprNode::Op::Mul: return "(* " + node_to_string(n.lhs) + " " + node_to_string(n.rhs) + ")";
  case ExprNode::Op::Div: return "(div " + node_to_string(n.lhs) + " " + node_to_string(n.rhs) + ")";
  case ExprNode::Op::Mod: return "(mod " + node_to_string(n.lhs) + " " + node_to_string(n.rhs) + ")";
  }
  return "?";
}

std::string ConstraintSet::to_text() const {
  std::ostringstream out;
  for (const auto& v : vars_) {
    out << "(declare-const " << v.name << " Int)\n";
    out << "(assert (<= " << v.domain.lo << " " << v.name << " " << v.domain.hi << "))\n";
  }
  for (const auto& c : constraints_) {
    const char* rel = c.rel == RelOp::Ne ? "distinct" : rel_op_symbol(c.rel);
    if (c.rel == RelOp::Eq)
      rel = "=";
    out << "(assert (" << rel << " " << node_to_string(c.lhs) << " " << node_to_string(c.rhs)
        << "))  ; kind " << c.kind;
    if (!c.origin.empty())
      out << " " << c.origin;
    out << "\n";
  }
  out << "(check-sat)\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Exact evaluation

namespace {

std::optional<mpz_class> eval_exact(const ConstraintSet& set, NodeId id,
                                    const std::vector<std::int64_t>& model,
                                    std::vector<std::optional<mpz_class>>& memo,
                                    std::vector<bool>& done) {
  auto k = static_cast<std::size_t>(id);
  if (done[k])
    return memo[k];
  const ExprNode& n = set.node(id);
  std::optional<mpz_class> out;
  switch (n.op) {
  case ExprNode::Op::Const: out = mpz_class(static_cast<long>(n.value)); break;
  case ExprNode::Op::Var: out = mpz_class(static_cast<long>(model.at(static_cast<std::size_t>(n.var)))); break;
  default: {
    auto a = eval_exact(set, n.lhs, model, memo, done);
    auto b = eval_exact(set, n.rhs, model, memo, done);
    if (!a || !b)
      break;
    mpz_class r;
    switch (n.op) {
    case ExprNode::Op::Add: r = *a + *b; break;
    case ExprNode::Op::Sub: r = *a - *b; break;
    case ExprNode::Op::Mul: r = *a * *b; break;
    case ExprNode::Op::Div:
      if (*b < 1)
        break;
      mpz_tdiv_q(r.get_mpz_t(), a->get_mpz_t(), b->get_mpz_t());
      out = r;
      break;
    case ExprNode::Op::Mod:
      if (*b < 1)
        break;
      mpz_tdiv_r(r.get_mpz_t(), a->get_mpz_t(), b->get_mpz_t());
      out = r;
      break;
    default: break;
    }
    if (n.op == ExprNode::Op::Add || n.op == ExprNode::Op::Sub || n.op == ExprNode::Op::Mul)
      out = r;
  }
  }
  memo[k] = out;
  done[k] = true;
  return out;
}

bool compare(RelOp rel, int cmp) {
  switch (rel) {
  case RelOp::Lt: return cmp < 0;
  case RelOp::Le: return cmp <= 0;
  case RelOp::Gt: return cmp > 0;
  case RelOp::Ge: return cmp >= 0;
  case RelOp::Eq: return cmp == 0;
  case RelOp::Ne: return cmp != 0;
  }
  return false;
}

} // namespace

std::optional<std::int64_t> evaluate(const ConstraintSet& set, NodeId node,
                                     const std::vector<std::int64_t>& model) {
  std::vector<std::optional<mpz_class>> memo(set.nodes().size());
  std::vector<bool> done(set.nodes().size(), false);
  auto v = eval_exact(set, node, model, memo, done);
  if (!v || !v->fits_slong_p())
    return std::nullopt;
  return v->get_si();
}

bool satisfied(const ConstraintSet& set, const Constraint& c, const std::vector<std::int64_t>& model) {
  std::vector<std::optional<mpz_class>> memo(set.nodes().size());
  std::vector<bool> done(set.nodes().size(), false);
  auto a = eval_exact(set, c.lhs, model, memo, done);
  auto b = eval_exact(set, c.rhs, model, memo, done);
  if (!a || !b)
    return false;
  return compare(c.rel, cmp(*a, *b));
}

// ---------------------------------------------------------------------------
// Interval propagation

namespace {

constexpr i128 kInf = Interval::kInfinity;

struct Iv {
  i128 lo, hi;
  bool empty() const { return lo > hi; }
};

bool pos_inf(i128 v) { return v >= kInf; }
bool neg_inf(i128 v) { return v <= -kInf; }
bool infinite(i128 v) { return pos_inf(v) || neg_inf(v); }
i128 clamp(i128 v) { return v > kInf ? kInf : (v < -kInf ? -kInf : v); }
i128 neg(i128 v) { return clamp(-v); }

i128 add_lo(i128 a, i128 b) {
  if (neg_inf(a) || neg_inf(b))
    return -kInf;
  if (pos_inf(a) || pos_inf(b))
    return kInf;
  return clamp(a + b);
}

i128 add_hi(i128 a, i128 b) {
  if (pos_inf(a) || pos_inf(b))
    return kInf;
  if (neg_inf(a) || neg_inf(b))
    return -kInf;
  return clamp(a + b);
}

i128 mul(i128 a, i128 b) {
  if (a == 0 || b == 0)
    return 0;
  if (infinite(a) || infinite(b))
    return ((a < 0) != (b < 0)) ? -kInf : kInf;
  return clamp(a * b);
}

// Truncating division, b >= 1.
i128 tdiv(i128 a, i128 b) {
  if (infinite(a))
    return a < 0 ? -kInf : kInf;
  if (pos_inf(b))
    return 0;
  return a / b;
}

i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0)))
    --q;
  return q;
}

i128 ceil_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0)))
    ++q;
  return q;
}

bool narrow(Iv& x, i128 lo, i128 hi) {
  if (!neg_inf(lo) && lo > x.lo)
    x.lo = lo;
  if (!pos_inf(hi) && hi < x.hi)
    x.hi = hi;
  return !x.empty();
}

Iv forward(const ExprNode& n, Iv& a, Iv& b, bool& ok) {
  switch (n.op) {
  case ExprNode::Op::Add: return {add_lo(a.lo, b.lo), add_hi(a.hi, b.hi)};
  case ExprNode::Op::Sub: return {add_lo(a.lo, neg(b.hi)), add_hi(a.hi, neg(b.lo))};
  case ExprNode::Op::Mul: {
    i128 c[4] = {mul(a.lo, b.lo), mul(a.lo, b.hi), mul(a.hi, b.lo), mul(a.hi, b.hi)};
    return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
  }
  case ExprNode::Op::Div: {
    if (!narrow(b, 1, kInf)) {
      ok = false;
      return {1, 0};
    }
    i128 c[4] = {tdiv(a.lo, b.lo), tdiv(a.lo, b.hi), tdiv(a.hi, b.lo), tdiv(a.hi, b.hi)};
    return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
  }
  case ExprNode::Op::Mod: {
    if (!narrow(b, 1, kInf)) {
      ok = false;
      return {1, 0};
    }
    i128 m = pos_inf(b.hi) ? kInf : b.hi - 1;
    if (a.lo >= 0) {
      if (!pos_inf(a.hi) && a.hi < b.lo)
        return a;
      return {0, std::min(a.hi, m)};
    }
    if (a.hi <= 0) {
      if (!neg_inf(a.lo) && -a.lo < b.lo)
        return a;
      return {std::max(a.lo, -m), 0};
    }
    return {std::max(a.lo, -m), std::min(a.hi, m)};
  }
  default: return {0, 0};
  }
}

// Narrows x given z = x * y.
bool project_mul(const Iv& z, Iv& x, const Iv& y) {
  if (infinite(z.lo) || infinite(z.hi) || infinite(y.lo) || infinite(y.hi))
    return true;
  if (y.lo <= 0 && y.hi >= 0)
    return true;
  i128 zc[2] = {z.lo, z.hi}, yc[2] = {y.lo, y.hi};
  i128 lo = kInf, hi = -kInf;
  for (i128 a : zc)
    for (i128 b : yc) {
      lo = std::min(lo, ceil_div(a, b));
      hi = std::max(hi, floor_div(a, b));
    }
  return narrow(x, lo, hi);
}

bool backward(const ExprNode& n, const Iv& z, Iv& a, Iv& b) {
  switch (n.op) {
  case ExprNode::Op::Add:
    return narrow(a, add_lo(z.lo, neg(b.hi)), add_hi(z.hi, neg(b.lo))) &&
           narrow(b, add_lo(z.lo, neg(a.hi)), add_hi(z.hi, neg(a.lo)));
  case ExprNode::Op::Sub:
    return narrow(a, add_lo(z.lo, b.lo), add_hi(z.hi, b.hi)) &&
           narrow(b, add_lo(a.lo, neg(z.hi)), add_hi(a.hi, neg(z.lo)));
  case ExprNode::Op::Mul: {
    if (z.lo > 0 || z.hi < 0) {
      if (a.lo == 0) a.lo = 1;
      if (a.hi == 0) a.hi = -1;
      if (b.lo == 0) b.lo = 1;
      if (b.hi == 0) b.hi = -1;
      if (a.empty() || b.empty())
        return false;
    }
    return project_mul(z, a, b) && project_mul(z, b, a);
  }
  case ExprNode::Op::Div: {
    if (!narrow(b, 1, kInf))
      return false;
    if (infinite(b.lo) || infinite(b.hi))
      return true;
    // x <= z*y + (y - 1) and x >= z*y - (y - 1), tighter when x has a sign.
    if (!pos_inf(z.hi)) {
      i128 k = z.hi + 1;
      i128 hi = (k >= 0 ? k * b.hi : k * b.lo) - 1;
      if (a.hi <= 0)
        hi = z.hi >= 0 ? z.hi * b.hi : z.hi * b.lo;
      if (!narrow(a, -kInf, hi))
        return false;
    }
    if (!neg_inf(z.lo)) {
      i128 k = z.lo - 1;
      i128 lo = (k >= 0 ? k * b.lo : k * b.hi) + 1;
      if (a.lo >= 0)
        lo = z.lo >= 0 ? z.lo * b.lo : z.lo * b.hi;
      if (!narrow(a, lo, kInf))
        return false;
    }
    if (a.lo >= 0 && !infinite(a.hi) && z.lo >= 1 && !infinite(z.lo))
      if (!narrow(b, -kInf, a.hi / z.lo))
        return false;
    if (a.lo >= 0 && !infinite(z.hi) && z.hi >= 0)
      if (!narrow(b, a.lo / (z.hi + 1) + 1, kInf))
        return false;
    return true;
  }
  case ExprNode::Op::Mod: {
    if (!narrow(b, 1, kInf))
      return false;
    if (z.lo > 0 && !infinite(z.lo)) {
      if (!narrow(b, z.lo + 1, kInf) || !narrow(a, z.lo, kInf))
        return false;
    }
    if (z.hi < 0 && !infinite(z.hi)) {
      if (!narrow(b, -z.hi + 1, kInf) || !narrow(a, -kInf, z.hi))
        return false;
    }
    return true;
  }
  default: return true;
  }
}

bool relate(RelOp rel, Iv& l, Iv& r) {
  switch (rel) {
  case RelOp::Le: return narrow(l, -kInf, r.hi) && narrow(r, l.lo, kInf);
  case RelOp::Lt: return narrow(l, -kInf, add_hi(r.hi, -1)) && narrow(r, add_lo(l.lo, 1), kInf);
  case RelOp::Ge: return relate(RelOp::Le, r, l);
  case RelOp::Gt: return relate(RelOp::Lt, r, l);
  case RelOp::Eq: return narrow(l, r.lo, r.hi) && narrow(r, l.lo, l.hi);
  case RelOp::Ne:
    for (int pass = 0; pass < 2; ++pass) {
      Iv& f = pass == 0 ? l : r;
      Iv& o = pass == 0 ? r : l;
      if (f.lo == f.hi && !infinite(f.lo)) {
        if (o.lo == f.lo) ++o.lo;
        if (o.hi == f.lo) --o.hi;
        if (o.empty())
          return false;
      }
    }
    return true;
  }
  return true;
}

constexpr int kRoundCap = 100;

bool forward_pass(const ConstraintSet& set, const std::vector<Interval>& domains, std::vector<Iv>& iv) {
  const auto& nodes = set.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const ExprNode& n = nodes[i];
    switch (n.op) {
    case ExprNode::Op::Const: iv[i] = {n.value, n.value}; break;
    case ExprNode::Op::Var: {
      const Interval& d = domains[static_cast<std::size_t>(n.var)];
      iv[i] = {d.lo, d.hi};
      break;
    }
    default: {
      bool ok = true;
      iv[i] = forward(n, iv[static_cast<std::size_t>(n.lhs)], iv[static_cast<std::size_t>(n.rhs)], ok);
      if (!ok || iv[i].empty())
        return false;
    }
    }
  }
  return true;
}

} // namespace

bool propagate(const ConstraintSet& set, std::vector<Interval>& domains, bool* stagnated) {
  if (stagnated)
    *stagnated = false;
  for (const auto& d : domains)
    if (d.empty())
      return false;
  const auto& nodes = set.nodes();
  std::vector<Iv> iv(nodes.size());
  for (int round = 0; round < kRoundCap; ++round) {
    if (!forward_pass(set, domains, iv))
      return false;
    for (const auto& c : set.constraints())
      if (!relate(c.rel, iv[static_cast<std::size_t>(c.lhs)], iv[static_cast<std::size_t>(c.rhs)]))
        return false;
    bool changed = false;
    for (std::size_t i = nodes.size(); i-- > 0;) {
      const ExprNode& n = nodes[i];
      if (n.op == ExprNode::Op::Const) {
        if (iv[i].lo > n.value || iv[i].hi < n.value)
          return false;
      } else if (n.op == ExprNode::Op::Var) {
        Interval& d = domains[static_cast<std::size_t>(n.var)];
        i128 lo = std::max<i128>(d.lo, iv[i].lo), hi = std::min<i128>(d.hi, iv[i].hi);
        if (lo > hi)
          return false;
        if (lo != d.lo || hi != d.hi) {
          d.lo = static_cast<std::int64_t>(lo);
          d.hi = static_cast<std::int64_t>(hi);
          changed = true;
        }
      } else if (!backward(n, iv[i], iv[static_cast<std::size_t>(n.lhs)],
                           iv[static_cast<std::size_t>(n.rhs)])) {
        return false;
      }
    }
    if (!changed)
      return true;
  }
  if (stagnated)
    *stagnated = true;
  return true;
}

namespace detail {

std::vector<Interval> forward_intervals(const ConstraintSet& set, const std::vector<Interval>& domains) {
  std::vector<Iv> iv(set.nodes().size());
  std::vector<Interval> out(iv.size(), Interval{-kInf, kInf});
  if (!forward_pass(set, domains, iv))
    return out;
  for (std::size_t i = 0; i < iv.size(); ++i)
    out[i] = Interval{static_cast<std::int64_t>(clamp(iv[i].lo)), static_cast<std::int64_t>(clamp(iv[i].hi))};
  return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Search

const char* verdict_name(Verdict::Kind kind) {
  switch (kind) {
  case Verdict::Kind::Unsat: return "unsat";
  case Verdict::Kind::Sat: return "sat";
  case Verdict::Kind::Timeout: return "timeout";
  }
  return "?";
}

std::map<std::string, std::int64_t> Verdict::named_model(const ConstraintSet& set) const {
  std::map<std::string, std::int64_t> out;
  for (std::size_t i = 0; i < model.size() && i < set.vars().size(); ++i)
    out[set.vars()[i].name] = model[i];
  return out;
}

std::optional<std::uint64_t> seed_from_environment() {
  const char* s = std::getenv("SCUBA_MINI_SEED");
  if (!s || !*s)
    return std::nullopt;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0')
    return std::nullopt;
  return v;
}

namespace {

struct SearchNode {
  std::vector<Interval> domains;
  int depth = 0;
};

} // namespace

Verdict solve(const ConstraintSet& set, const SolverOptions& options) {
  using clock = std::chrono::steady_clock;
  auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  std::size_t n = set.vars().size();
  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  if (options.seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(*options.seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i)
      rank[perm[i]] = i;
  }

  Verdict out;
  std::vector<SearchNode> stack;
  SearchNode root;
  for (const auto& v : set.vars())
    root.domains.push_back(v.domain);
  stack.push_back(std::move(root));

  while (!stack.empty()) {
    ++out.nodes;
    if (elapsed() > options.timeout_seconds) {
      out.kind = Verdict::Kind::Timeout;
      out.elapsed_seconds = elapsed();
      return out;
    }
    SearchNode node = std::move(stack.back());
    stack.pop_back();
    bool stagnated = false;
    if (!propagate(set, node.domains, &stagnated))
      continue;

    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < n; ++i) {
      const Interval& d = node.domains[i];
      if (d.fixed())
        continue;
      if (!pick) {
        pick = i;
        continue;
      }
      const Interval& p = node.domains[*pick];
      i128 wd = static_cast<i128>(d.hi) - d.lo, wp = static_cast<i128>(p.hi) - p.lo;
      if (wd < wp || (wd == wp && rank[i] < rank[*pick]))
        pick = i;
    }

    if (!pick) {
      std::vector<std::int64_t> model;
      for (const auto& d : node.domains)
        model.push_back(d.lo);
      bool ok = std::all_of(set.constraints().begin(), set.constraints().end(),
                            [&](const Constraint& c) { return satisfied(set, c, model); });
      if (ok) {
        out.kind = Verdict::Kind::Sat;
        out.model = std::move(model);
        out.elapsed_seconds = elapsed();
        return out;
      }
      continue;
    }

    if (options.use_lp && (node.depth % 4 == 0 || stagnated) &&
        detail::lp_infeasible(set, node.domains))
      continue;

    const Interval& d = node.domains[*pick];
    i128 mid = static_cast<i128>(d.lo) + ((static_cast<i128>(d.hi) - d.lo) >> 1);
    SearchNode high{node.domains, node.depth + 1};
    high.domains[*pick].lo = static_cast<std::int64_t>(mid + 1);
    node.domains[*pick].hi = static_cast<std::int64_t>(mid);
    node.depth += 1;
    stack.push_back(std::move(high));
    stack.push_back(std::move(node));
  }
  out.kind = Verdict::Kind::Unsat;
  out.elapsed_seconds = elapsed();
  return out;
}

} // namespace scuba
