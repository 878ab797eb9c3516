#include <gtest/gtest.h>

#include <random>

#include "scuba/constraint_gen.hpp"
#include "solver_oracle.hpp"
#include "test_util.hpp"

namespace scuba {
namespace {

TEST(Propagate, IntervalIntersection) {
  ConstraintSet s;
  int x = s.add_var("x", {0, 100});
  s.add(RelOp::Ge, s.var(x), s.constant(5));
  s.add(RelOp::Lt, s.var(x), s.constant(7));
  std::vector<Interval> d{s.vars()[0].domain};
  ASSERT_TRUE(propagate(s, d));
  EXPECT_EQ(d[0], (Interval{5, 6}));
}

TEST(Propagate, ProductAtCorner) {
  ConstraintSet s;
  int x = s.add_var("x", {0, 10});
  int y = s.add_var("y", {0, 10});
  s.add(RelOp::Eq, s.binop(BinaryOp::Mul, s.var(x), s.var(y)), s.constant(100));
  std::vector<Interval> d{s.vars()[0].domain, s.vars()[1].domain};
  ASSERT_TRUE(propagate(s, d));
  EXPECT_EQ(d[0], (Interval{10, 10}));
  EXPECT_EQ(d[1], (Interval{10, 10}));
}

TEST(Propagate, Contradiction) {
  ConstraintSet s;
  int x = s.add_var("x", {0, 100});
  s.add(RelOp::Lt, s.var(x), s.constant(5));
  s.add(RelOp::Ge, s.var(x), s.constant(5));
  std::vector<Interval> d{s.vars()[0].domain};
  EXPECT_FALSE(propagate(s, d));
}

TEST(Propagate, DivisorExcludesZero) {
  ConstraintSet s;
  int x = s.add_var("x", {0, 10});
  int y = s.add_var("y", {0, 10});
  s.add(RelOp::Ge, s.binop(BinaryOp::Div, s.var(x), s.var(y)), s.constant(0));
  std::vector<Interval> d{s.vars()[0].domain, s.vars()[1].domain};
  ASSERT_TRUE(propagate(s, d));
  EXPECT_EQ(d[1].lo, 1);
}

TEST(Propagate, DivisorFixedAtZeroIsContradiction) {
  ConstraintSet s;
  int x = s.add_var("x", {0, 10});
  s.add(RelOp::Ge, s.binop(BinaryOp::Mod, s.var(x), s.constant(0)), s.constant(0));
  std::vector<Interval> d{s.vars()[0].domain};
  EXPECT_FALSE(propagate(s, d));
  EXPECT_EQ(solve(s).kind, Verdict::Kind::Unsat);
}

TEST(Solve, EmptySetIsSat) {
  ConstraintSet s;
  s.add_var("x", {3, 9});
  Verdict v = solve(s);
  ASSERT_EQ(v.kind, Verdict::Kind::Sat);
  EXPECT_TRUE(s.vars()[0].domain.contains(v.model[0]));
}

TEST(Solve, NoVariables) {
  ConstraintSet s;
  s.add(RelOp::Lt, s.constant(1), s.constant(2));
  EXPECT_EQ(solve(s).kind, Verdict::Kind::Sat);
  ConstraintSet u;
  u.add(RelOp::Gt, u.constant(1), u.constant(2));
  EXPECT_EQ(solve(u).kind, Verdict::Kind::Unsat);
}

ConstraintBuild fig_set(const std::string& file, const std::string& target) {
  test::Program p(test::read_file(test::corpus_path(file)));
  HostSummary h = analyze_host(p.module);
  KernelSummary k = analyze_kernel(p.module, h.launches[0].kernel, h.launches[0]);
  for (const auto& m : k.mem_instrs)
    if (m.target_name == target)
      return build_constraints(p.module, m, h, k, h.launches[0], CheckKind::Upper);
  throw std::runtime_error("missing access");
}

TEST(Solve, FluidIsSatWithSmallSize) {
  ConstraintBuild c = fig_set("ports/fluid_adv.mcu", "cubD");
  Verdict v = solve(c.set);
  ASSERT_EQ(v.kind, Verdict::Kind::Sat);
  EXPECT_TRUE(test::holds(c.set, v.model));
  EXPECT_TRUE(test::in_domains(c.set, v.model));
  std::int64_t size = v.model[static_cast<std::size_t>(c.size_var)];
  std::int64_t offset = v.model[static_cast<std::size_t>(c.offset_var)];
  EXPECT_LT(size, 256);
  EXPECT_GE(offset, size);
}

TEST(Solve, SaxpyIsUnsat) {
  ConstraintBuild c = fig_set("ports/saxpy.mcu", "array");
  EXPECT_EQ(solve(c.set).kind, Verdict::Kind::Unsat);
}

// x^3 + y^3 + z^3 = 33 has no solution in a small box, and nothing in
// interval or linear reasoning shows that quickly.
TEST(Solve, TimeoutReported) {
  ConstraintSet s;
  NodeId sum = -1;
  for (int i = 0; i < 3; ++i) {
    int v = s.add_var("x" + std::to_string(i), {-100000, 100000});
    NodeId cube = s.binop(BinaryOp::Mul, s.var(v), s.binop(BinaryOp::Mul, s.var(v), s.var(v)));
    sum = sum < 0 ? cube : s.binop(BinaryOp::Add, sum, cube);
  }
  s.add(RelOp::Eq, sum, s.constant(33));
  SolverOptions o;
  o.timeout_seconds = 0.02;
  Verdict v = solve(s, o);
  EXPECT_EQ(v.kind, Verdict::Kind::Timeout);
  EXPECT_GE(v.elapsed_seconds, 0.02);
  EXPECT_LT(v.elapsed_seconds, 2.0);
}

TEST(Solve, PrimeProductIsUnsat) {
  ConstraintSet s;
  int x = s.add_var("x", {2, 1000002});
  int y = s.add_var("y", {2, 1000002});
  s.add(RelOp::Eq, s.binop(BinaryOp::Mul, s.var(x), s.var(y)), s.constant(1000003));
  EXPECT_EQ(solve(s).kind, Verdict::Kind::Unsat);
  ConstraintSet c;
  x = c.add_var("x", {2, 1000000});
  y = c.add_var("y", {2, 1000000});
  c.add(RelOp::Eq, c.binop(BinaryOp::Mul, c.var(x), c.var(y)), c.constant(1000001));
  Verdict v = solve(c);
  ASSERT_EQ(v.kind, Verdict::Kind::Sat);
  EXPECT_EQ(v.model[0] * v.model[1], 1000001);
}

TEST(Solve, NamedModel) {
  ConstraintSet s;
  int x = s.add_var("x", {0, 10});
  s.add(RelOp::Eq, s.var(x), s.constant(4));
  Verdict v = solve(s);
  EXPECT_EQ(v.named_model(s).at("x"), 4);
}

TEST(ConstraintSetText, HasDeclarationsAndKinds) {
  ConstraintSet s;
  int x = s.add_var("x", {0, 10});
  s.add(RelOp::Ge, s.var(x), s.constant(4), 2, "offset >= size");
  std::string t = s.to_text();
  EXPECT_NE(t.find("(declare-const x Int)"), std::string::npos) << t;
  EXPECT_NE(t.find("kind 2"), std::string::npos) << t;
  EXPECT_THROW(s.add_var("x", {0, 1}), InternalError);
}

TEST(ConstraintSet, HashConsing) {
  ConstraintSet s;
  int x = s.add_var("x", {0, 10});
  NodeId a = s.binop(BinaryOp::Add, s.var(x), s.constant(1));
  NodeId b = s.binop(BinaryOp::Add, s.var(x), s.constant(1));
  EXPECT_EQ(a, b);
}

// Random sets against exhaustive enumeration, with and without the relaxation.
TEST(SolverProperty, MatchesEnumeration) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 400; ++i) {
    ConstraintSet s = test::random_set(rng);
    bool expected = test::enumerate_sat(s);
    for (bool lp : {true, false}) {
      SolverOptions o;
      o.use_lp = lp;
      Verdict v = solve(s, o);
      ASSERT_NE(v.kind, Verdict::Kind::Timeout) << s.to_text();
      EXPECT_EQ(v.kind == Verdict::Kind::Sat, expected) << "lp=" << lp << "\n" << s.to_text();
      if (v.kind == Verdict::Kind::Sat) {
        EXPECT_TRUE(test::holds(s, v.model)) << s.to_text();
        EXPECT_TRUE(test::in_domains(s, v.model)) << s.to_text();
      }
    }
  }
}

// Propagation never removes a solution.
TEST(SolverProperty, PropagationKeepsSolutions) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 300; ++i) {
    ConstraintSet s = test::random_set(rng, 12);
    std::vector<Interval> d;
    for (const auto& v : s.vars())
      d.push_back(v.domain);
    bool ok = propagate(s, d);
    std::vector<std::int64_t> m;
    for (const auto& v : s.vars())
      m.push_back(v.domain.lo);
    for (;;) {
      if (test::holds(s, m)) {
        ASSERT_TRUE(ok) << s.to_text();
        for (std::size_t k = 0; k < m.size(); ++k)
          ASSERT_TRUE(d[k].contains(m[k])) << s.to_text();
      }
      std::size_t k = 0;
      while (k < m.size() && m[k] == s.vars()[k].domain.hi) {
        m[k] = s.vars()[k].domain.lo;
        ++k;
      }
      if (k == m.size())
        break;
      ++m[k];
    }
  }
}

TEST(SolverProperty, Deterministic) {
  std::mt19937_64 rng(31337);
  for (int i = 0; i < 100; ++i) {
    ConstraintSet s = test::random_set(rng);
    for (std::optional<std::uint64_t> seed : {std::optional<std::uint64_t>{}, std::optional<std::uint64_t>{42}}) {
      SolverOptions o;
      o.seed = seed;
      Verdict a = solve(s, o), b = solve(s, o);
      EXPECT_EQ(a.kind, b.kind);
      EXPECT_EQ(a.model, b.model);
      EXPECT_EQ(a.nodes, b.nodes);
    }
  }
}

TEST(SolverProperty, SeedDoesNotChangeVerdict) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    ConstraintSet s = test::random_set(rng);
    SolverOptions a, b;
    b.seed = 1234;
    EXPECT_EQ(solve(s, a).kind, solve(s, b).kind);
  }
}

TEST(SolverProperty, MonotoneInBound) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 150; ++i) {
    ConstraintSet s = test::random_set(rng, 8, false);
    bool sat_small = solve(s).kind == Verdict::Kind::Sat;
    ConstraintSet wide = s;
    for (auto& v : wide.vars())
      v.domain.hi += 20;
    if (sat_small) {
      EXPECT_EQ(solve(wide).kind, Verdict::Kind::Sat) << s.to_text();
    }
  }
}

} // namespace
} // namespace scuba
