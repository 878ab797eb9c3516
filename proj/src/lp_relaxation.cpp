#include "lp_relaxation.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <optional>

#include <gmpxx.h>

namespace scuba::detail {

namespace {

using Mono = std::vector<int>;              // sorted atom ids; empty is the constant term
using Poly = std::map<Mono, mpz_class>;

constexpr std::size_t kMaxTerms = 64;
constexpr std::size_t kMaxDegree = 4;
constexpr std::size_t kMaxRltRows = 96;
constexpr int kMaxPivots = 4000;

struct Row {
  std::map<int, mpq_class> coef;  // column -> coefficient
  mpq_class rhs;
  bool equality = false;          // otherwise <=
};

Mono merge(const Mono& a, const Mono& b) {
  Mono m;
  m.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(m));
  return m;
}

void add_into(Poly& p, const Mono& m, const mpz_class& c) {
  if (c == 0)
    return;
  auto [it, inserted] = p.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0)
      p.erase(it);
  }
}

class Relaxation {
public:
  Relaxation(const ConstraintSet& set, const std::vector<Interval>& domains)
      : set_(set), domains_(domains), nodes_(forward_intervals(set, domains)),
        nvars_(static_cast<int>(domains.size())) {}

  bool infeasible() {
    std::vector<std::size_t> base_rows;
    for (const auto& c : set_.constraints()) {
      if (c.rel == RelOp::Ne)
        continue;
      auto l = expand(c.lhs);
      auto r = expand(c.rhs);
      if (!l || !r)
        continue;
      Poly p = *l;
      for (const auto& [m, k] : *r)
        add_into(p, m, -k);
      // Normalize to p <= 0 or p = 0.
      switch (c.rel) {
      case RelOp::Lt: add_into(p, {}, 1); break;
      case RelOp::Gt: negate(p); add_into(p, {}, 1); break;
      case RelOp::Ge: negate(p); break;
      default: break;
      }
      if (add_row(p, c.rel == RelOp::Eq))
        base_rows.push_back(rows_.size() - 1);
    }
    add_rlt_cuts(base_rows);
    return phase_one_infeasible();
  }

private:
  static void negate(Poly& p) {
    for (auto& [m, k] : p)
      k = -k;
  }

  bool finite(const Interval& iv) const {
    return iv.lo > -Interval::kInfinity && iv.hi < Interval::kInfinity;
  }

  Interval atom_bounds(int atom) const {
    if (atom < nvars_)
      return domains_[static_cast<std::size_t>(atom)];
    return nodes_[static_cast<std::size_t>(atom - nvars_)];
  }

  std::optional<Poly> expand(NodeId id) {
    if (auto it = memo_.find(id); it != memo_.end())
      return it->second;
    const ExprNode& n = set_.node(id);
    std::optional<Poly> out;
    const Interval& iv = nodes_[static_cast<std::size_t>(id)];
    if (iv.fixed() && finite(iv)) {
      out = Poly{};
      add_into(*out, {}, mpz_class(static_cast<long>(iv.lo)));
    } else {
      switch (n.op) {
      case ExprNode::Op::Const:
        out = Poly{};
        add_into(*out, {}, mpz_class(static_cast<long>(n.value)));
        break;
      case ExprNode::Op::Var: out = Poly{{Mono{n.var}, mpz_class(1)}}; break;
      case ExprNode::Op::Add:
      case ExprNode::Op::Sub: {
        auto a = expand(n.lhs), b = expand(n.rhs);
        if (!a || !b)
          break;
        out = *a;
        for (const auto& [m, k] : *b)
          add_into(*out, m, n.op == ExprNode::Op::Add ? mpz_class(k) : mpz_class(-k));
        if (out->size() > kMaxTerms)
          out.reset();
        break;
      }
      case ExprNode::Op::Mul: {
        auto a = expand(n.lhs), b = expand(n.rhs);
        if (!a || !b || a->size() * b->size() > kMaxTerms * 4)
          break;
        Poly prod;
        bool ok = true;
        for (const auto& [ma, ka] : *a)
          for (const auto& [mb, kb] : *b) {
            if (ma.size() + mb.size() > kMaxDegree)
              ok = false;
            else
              add_into(prod, merge(ma, mb), ka * kb);
          }
        if (ok && prod.size() <= kMaxTerms)
          out = std::move(prod);
        break;
      }
      case ExprNode::Op::Div:
      case ExprNode::Op::Mod:
        if (finite(iv)) {
          out = Poly{{Mono{nvars_ + id}, mpz_class(1)}};
          div_mod_cuts(id);
        }
        break;
      }
    }
    memo_[id] = out;
    return out;
  }

  // Definitional cuts for a division or modulo atom with a nonnegative dividend.
  void div_mod_cuts(NodeId id) {
    const ExprNode& n = set_.node(id);
    const Interval& x = nodes_[static_cast<std::size_t>(n.lhs)];
    const Interval& d = nodes_[static_cast<std::size_t>(n.rhs)];
    if (x.lo < 0 || !finite(x) || !finite(d) || d.lo < 1)
      return;
    auto px = expand(n.lhs);
    if (!px)
      return;
    Mono z{nvars_ + id};
    if (n.op == ExprNode::Op::Div && d.fixed()) {
      mpz_class k(static_cast<long>(d.lo));
      Poly lower = *px;  // d*z - x <= 0
      negate(lower);
      add_into(lower, z, k);
      add_row(lower, false);
      Poly upper = *px;  // x - d*z - (d - 1) <= 0
      add_into(upper, z, -k);
      add_into(upper, {}, -(k - 1));
      add_row(upper, false);
    } else if (n.op == ExprNode::Op::Mod) {
      Poly le = *px;     // z - x <= 0
      negate(le);
      add_into(le, z, 1);
      add_row(le, false);
      if (auto pd = expand(n.rhs)) {
        Poly lt = *pd;   // z - d + 1 <= 0
        negate(lt);
        add_into(lt, z, 1);
        add_into(lt, {}, 1);
        add_row(lt, false);
      }
    }
  }

  std::optional<int> column(const Mono& m) {
    if (auto it = columns_.find(m); it != columns_.end())
      return it->second;
    if (m.size() == 1) {
      Interval b = atom_bounds(m[0]);
      if (!finite(b))
        return std::nullopt;
      return new_column(m, mpz_class(static_cast<long>(b.lo)), mpz_class(static_cast<long>(b.hi)));
    }
    Mono head{m[0]}, rest(m.begin() + 1, m.end());
    auto u = column(head), v = column(rest);
    if (!u || !v)
      return std::nullopt;
    mpz_class ul = lo_[static_cast<std::size_t>(*u)], uh = hi_[static_cast<std::size_t>(*u)];
    mpz_class vl = lo_[static_cast<std::size_t>(*v)], vh = hi_[static_cast<std::size_t>(*v)];
    mpz_class c[4] = {ul * vl, ul * vh, uh * vl, uh * vh};
    mpz_class lo = c[0], hi = c[0];
    for (const auto& x : c) {
      if (x < lo) lo = x;
      if (x > hi) hi = x;
    }
    int w = new_column(m, lo, hi);
    // McCormick envelope of w = u * v.
    auto envelope = [&](int sign, const mpz_class& a, const mpz_class& b) {
      // sign * (w - a*v - b*u + a*b) >= 0, written as <= 0.
      Row r;
      r.coef[w] = mpq_class(-sign);
      r.coef[*v] += mpq_class(sign * a);
      r.coef[*u] += mpq_class(sign * b);
      r.rhs = mpq_class(sign * a * b);
      rows_.push_back(std::move(r));
    };
    envelope(1, ul, vl);
    envelope(1, uh, vh);
    envelope(-1, uh, vl);
    envelope(-1, ul, vh);
    return w;
  }

  int new_column(const Mono& m, mpz_class lo, mpz_class hi) {
    int id = static_cast<int>(lo_.size());
    columns_[m] = id;
    monos_.push_back(m);
    lo_.push_back(std::move(lo));
    hi_.push_back(std::move(hi));
    return id;
  }

  bool add_row(const Poly& p, bool equality) {
    Row r;
    r.equality = equality;
    for (const auto& [m, k] : p) {
      if (m.empty()) {
        r.rhs = mpq_class(-k);
        continue;
      }
      auto c = column(m);
      if (!c)
        return false;
      r.coef[*c] += mpq_class(k);
    }
    rows_.push_back(std::move(r));
    return true;
  }

  // Products of constraint rows with nonnegative bound factors (x - l) and
  // (u - x), kept only when every product monomial already has a column.
  // Later rows (guards, size, check) go first.
  void add_rlt_cuts(const std::vector<std::size_t>& base) {
    std::size_t added = 0;
    std::size_t ncols = monos_.size();
    for (auto ri = base.rbegin(); ri != base.rend(); ++ri) {
      Row row = rows_[*ri];
      for (std::size_t x = 0; x < ncols && added < kMaxRltRows; ++x) {
        if (monos_[x].size() != 1 || monos_[x][0] >= nvars_ || lo_[x] == hi_[x])
          continue;
        for (int side = 0; side < 2 && added < kMaxRltRows; ++side) {
          // factor = s*x + t, nonnegative.
          mpq_class s = side == 0 ? 1 : -1;
          mpq_class t = side == 0 ? mpq_class(-lo_[x]) : mpq_class(hi_[x]);
          // (sum a_j c_j - rhs) * factor, <= 0 or = 0.
          Row cut;
          cut.equality = row.equality;
          bool ok = true;
          for (const auto& [col, a] : row.coef) {
            auto m = merge(monos_[static_cast<std::size_t>(col)], monos_[x]);
            auto it = columns_.find(m);
            if (it == columns_.end()) {
              ok = false;
              break;
            }
            cut.coef[it->second] += a * s;
            cut.coef[col] += a * t;
          }
          if (!ok)
            break;
          cut.coef[static_cast<int>(x)] -= row.rhs * s;
          cut.rhs = row.rhs * t;
          rows_.push_back(std::move(cut));
          ++added;
        }
      }
    }
  }

  // Phase 1 of the simplex method on shifted columns y = x - lo >= 0.
  bool phase_one_infeasible() {
    std::size_t n = monos_.size();
    std::vector<Row> all = rows_;
    for (std::size_t j = 0; j < n; ++j) {
      Row ub;
      ub.coef[static_cast<int>(j)] = 1;
      ub.rhs = mpq_class(hi_[j]);
      all.push_back(std::move(ub));
    }
    std::size_t m = all.size();
    // Column layout: structural n, one slack per inequality, one artificial per row as needed.
    std::size_t slack_count = 0;
    for (const auto& r : all)
      if (!r.equality)
        ++slack_count;
    std::size_t total = n + slack_count + m;  // upper bound on columns
    std::vector<std::vector<mpq_class>> t(m, std::vector<mpq_class>(total + 1));
    std::vector<std::size_t> basis(m);
    std::vector<bool> artificial(total, false);
    std::size_t next = n;
    std::size_t used = n + slack_count;
    std::size_t art = used;
    for (std::size_t i = 0; i < m; ++i) {
      const Row& r = all[i];
      mpq_class rhs = r.rhs;
      for (const auto& [col, a] : r.coef) {
        t[i][static_cast<std::size_t>(col)] = a;
        rhs -= a * lo_[static_cast<std::size_t>(col)];
      }
      std::optional<std::size_t> slack;
      if (!r.equality) {
        slack = next++;
        t[i][*slack] = 1;
      }
      t[i][total] = rhs;
      if (rhs < 0) {
        for (auto& v : t[i])
          v = -v;
      }
      if (slack && rhs >= 0) {
        basis[i] = *slack;
      } else {
        std::size_t a = art++;
        artificial[a] = true;
        t[i][a] = 1;
        basis[i] = a;
      }
    }
    std::size_t cols = art;
    // Reduced costs of minimizing the sum of artificials.
    std::vector<mpq_class> cost(total + 1);
    for (std::size_t i = 0; i < m; ++i) {
      if (!artificial[basis[i]])
        continue;
      for (std::size_t j = 0; j < cols; ++j)
        if (!artificial[j])
          cost[j] -= t[i][j];
      cost[total] -= t[i][total];
    }
    for (int pivots = 0; pivots < kMaxPivots; ++pivots) {
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < cols; ++j)
        if (sgn(cost[j]) < 0) {
          enter = j;
          break;
        }
      if (!enter)
        return sgn(cost[total]) < 0;  // optimum sum of artificials is -cost[total]
      std::optional<std::size_t> leave;
      mpq_class best;
      for (std::size_t i = 0; i < m; ++i) {
        if (sgn(t[i][*enter]) <= 0)
          continue;
        mpq_class ratio = t[i][total] / t[i][*enter];
        if (!leave || ratio < best || (ratio == best && basis[i] < basis[*leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave)
        return false;
      pivot(t, cost, *leave, *enter, cols, total);
      basis[*leave] = *enter;
    }
    return false;
  }

  static void pivot(std::vector<std::vector<mpq_class>>& t, std::vector<mpq_class>& cost,
                    std::size_t r, std::size_t c, std::size_t cols, std::size_t total) {
    mpq_class p = t[r][c];
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j <= total; ++j) {
      if (j >= cols && j != total)
        continue;
      if (sgn(t[r][j]) != 0) {
        t[r][j] /= p;
        nz.push_back(j);
      }
    }
    auto eliminate = [&](std::vector<mpq_class>& row) {
      if (sgn(row[c]) == 0)
        return;
      mpq_class f = row[c];
      for (std::size_t j : nz)
        row[j] -= f * t[r][j];
    };
    for (std::size_t i = 0; i < t.size(); ++i)
      if (i != r)
        eliminate(t[i]);
    eliminate(cost);
  }

  const ConstraintSet& set_;
  const std::vector<Interval>& domains_;
  std::vector<Interval> nodes_;
  int nvars_;
  std::map<NodeId, std::optional<Poly>> memo_;
  std::map<Mono, int> columns_;
  std::vector<Mono> monos_;
  std::vector<mpz_class> lo_, hi_;
  std::vector<Row> rows_;
};

} // namespace

bool lp_infeasible(const ConstraintSet& set, const std::vector<Interval>& domains) {
  return Relaxation(set, domains).infeasible();
}

} // namespace scuba::detail
