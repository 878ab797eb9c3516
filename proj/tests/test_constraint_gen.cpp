#include <gtest/gtest.h>

#include "scuba/constraint_gen.hpp"
#include "test_util.hpp"

namespace scuba {
namespace {

struct Built {
  test::Program p;
  HostSummary host;
  std::vector<KernelSummary> kernels;

  explicit Built(const std::string& src) : p(src), host(analyze_host(p.module)) {
    for (const auto& l : host.launches)
      kernels.push_back(analyze_kernel(p.module, l.kernel, l));
  }

  ConstraintBuild build(const std::string& target, CheckKind check, std::size_t launch = 0,
                        DomainBounds bounds = {}) {
    for (const auto& m : kernels.at(launch).mem_instrs)
      if (m.target_name == target)
        return build_constraints(p.module, m, host, kernels[launch], host.launches[launch], check, bounds);
    throw std::runtime_error("no access to " + target);
  }
};

std::vector<std::string> constraint_texts(const ConstraintSet& s) {
  std::vector<std::string> out;
  for (const auto& c : s.constraints())
    out.push_back(s.node_to_string(c.lhs) + " " + rel_op_symbol(c.rel) + " " + s.node_to_string(c.rhs));
  return out;
}

bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

int kind2_count(const ConstraintSet& s) {
  int n = 0;
  for (const auto& c : s.constraints())
    n += c.kind == 2;
  return n;
}

TEST(ConstraintGen, VarNames) {
  EXPECT_EQ(solver_var_name("multiples"), "solMultiples");
  EXPECT_EQ(solver_var_name("cubN"), "solCubN");
}

TEST(ConstraintGen, FluidSet) {
  Built b(test::read_file(test::corpus_path("ports/fluid_adv.mcu")));
  ConstraintBuild c = b.build("cubD", CheckKind::Upper);
  ASSERT_TRUE(c.unverifiable.empty());
  auto t = constraint_texts(c.set);
  EXPECT_TRUE(has(t, "solOffset == (+ (* solTidY 16) solTidX)")) << c.set.to_text();
  EXPECT_TRUE(has(t, "solBDimX == 16"));
  EXPECT_TRUE(has(t, "solBDimY == 16"));
  EXPECT_TRUE(has(t, "solGDimX == solNelements"));
  EXPECT_TRUE(has(t, "solOffset >= solSize"));
  EXPECT_TRUE(has(t, "solTidX < solBDimX"));
  EXPECT_TRUE(has(t, "solBidZ < solGDimZ"));
  EXPECT_EQ(kind2_count(c.set), 1);
  // solSize = (cubN+1)^3 * Nelements * 3 under any assignment.
  auto cub = c.set.find_var("solCubN"), ne = c.set.find_var("solNelements");
  ASSERT_TRUE(cub && ne);
  std::vector<std::int64_t> model(c.set.vars().size(), 0);
  model[static_cast<std::size_t>(*cub)] = 2;
  model[static_cast<std::size_t>(*ne)] = 5;
  for (const auto& con : c.set.constraints())
    if (con.lhs == c.set.var(c.size_var) && con.rel == RelOp::Eq) {
      EXPECT_EQ(*evaluate(c.set, con.rhs, model), 27 * 5 * 3);
    }
}

TEST(ConstraintGen, SaxpySetBindsOffsetAndSize) {
  Built b(test::read_file(test::corpus_path("ports/saxpy.mcu")));
  ConstraintBuild c = b.build("array", CheckKind::Upper);
  auto t = constraint_texts(c.set);
  EXPECT_TRUE(has(t, "solBDimX == 512")) << c.set.to_text();
  EXPECT_TRUE(has(t, "solGDimX == solMultiples"));
  EXPECT_TRUE(has(t, "solSize == (* solMultiples 512)"));
  EXPECT_TRUE(has(t, "solOffset == (+ solTidX (* solBDimX solBidX))"));
}

TEST(ConstraintGen, LoopVariableBounds) {
  Built b(test::read_file(test::corpus_path("ports/sosfilt.mcu")));
  ConstraintBuild c = b.build("s_zi", CheckKind::Upper);
  auto t = constraint_texts(c.set);
  ASSERT_TRUE(c.set.find_var("solI").has_value()) << c.set.to_text();
  EXPECT_TRUE(has(t, "0 <= solI"));
  EXPECT_TRUE(has(t, "solI < 2"));
}

TEST(ConstraintGen, LoopBoundOverUnknown) {
  Built b("__global__ void k(int* a, int width) {\n"
          "  for (int i = 0; i < width; i++) {\n    a[i] = i;\n  }\n}\n"
          "void main() { int width = __input(); int* a = cudaMalloc(width); k<<<1, 1>>>(a, width); }");
  ConstraintBuild c = b.build("a", CheckKind::Upper);
  auto t = constraint_texts(c.set);
  EXPECT_TRUE(has(t, "0 <= solI")) << c.set.to_text();
  EXPECT_TRUE(has(t, "solI < solWidth"));
}

TEST(ConstraintGen, PartitionSize) {
  Built b("__global__ void sosfilt(int* zi, int sections, int width) {\n"
          "  extern __shared__ int smem[];\n"
          "  int* s_out = smem;\n"
          "  int* s_zi = &s_out[sections];\n"
          "  int* s_sos = &s_out[sections * width];\n"
          "  s_zi[threadIdx.x] = 1;\n"
          "}\n"
          "void main() {\n"
          "  int sections = __input();\n  int width = __input();\n  int shm = __input();\n"
          "  int* zi = cudaMalloc(sections);\n"
          "  sosfilt<<<1, sections, shm>>>(zi, sections, width);\n"
          "}\n");
  ConstraintBuild c = b.build("s_zi", CheckKind::Upper);
  auto t = constraint_texts(c.set);
  EXPECT_TRUE(has(t, "solSize == (- (* solSections solWidth) solSections)")) << c.set.to_text();
}

TEST(ConstraintGen, HostAssertsAndGuardsIncluded) {
  Built b(test::read_file(test::corpus_path("clean/stencil.mcu")));
  ConstraintBuild c = b.build("out", CheckKind::Upper);
  auto t = constraint_texts(c.set);
  EXPECT_TRUE(has(t, "solN >= 3")) << c.set.to_text();
  int guards = 0;
  for (const auto& con : c.set.constraints())
    guards += con.origin.find("guard") != std::string::npos;
  EXPECT_EQ(guards, 2);
}

TEST(ConstraintGen, UnderflowCheckUsesSignedOffset) {
  Built b(test::read_file(test::corpus_path("clean/stencil.mcu")));
  ConstraintBuild c = b.build("in", CheckKind::Underflow);
  const SolverVar& off = c.set.vars().at(static_cast<std::size_t>(c.offset_var));
  EXPECT_LT(off.domain.lo, 0);
  EXPECT_TRUE(has(constraint_texts(c.set), "solOffset < 0"));
  EXPECT_EQ(kind2_count(c.set), 1);
  EXPECT_EQ(c.size_var, -1);
}

TEST(ConstraintGen, UnknownSizeMarked) {
  Built b("__global__ void k(int* a) { a[0] = 1; }\nvoid main() { int* q; k<<<1, 1>>>(q); }");
  ConstraintBuild c = b.build("a", CheckKind::Upper);
  EXPECT_TRUE(c.size_unknown);
}

TEST(ConstraintGen, OverflowBecomesUnverifiable) {
  Built b("__global__ void k(int* a) { a[threadIdx.x] = 1; }\n"
          "void main() { int* a = cudaMalloc(1048576 * 1048576 * 1048576); k<<<1, 1>>>(a); }");
  ConstraintBuild c = b.build("a", CheckKind::Upper);
  EXPECT_FALSE(c.unverifiable.empty());
}

TEST(ConstraintGen, LoadLeavesNamedAfterVariable) {
  Built b(test::read_file(test::corpus_path("ports/push.mcu")));
  ConstraintBuild c = b.build("data1", CheckKind::Upper);
  bool found = false;
  for (const auto& [var, leaf] : c.leaves)
    if (leaf.display_name == "neighbor") {
      found = true;
      EXPECT_EQ(leaf.origin, UnknownOrigin::Load);
    }
  EXPECT_TRUE(found);
}

class CorpusConstraints : public ::testing::TestWithParam<std::string> {};

TEST_P(CorpusConstraints, WellFormed) {
  Built b(test::read_file(GetParam()));
  for (std::size_t l = 0; l < b.kernels.size(); ++l)
    for (const auto& m : b.kernels[l].mem_instrs)
      for (CheckKind check : {CheckKind::Upper, CheckKind::Underflow}) {
        ConstraintBuild c =
            build_constraints(b.p.module, m, b.host, b.kernels[l], b.host.launches[l], check);
        if (!c.unverifiable.empty() || (check == CheckKind::Upper && c.size_unknown))
          continue;
        EXPECT_EQ(kind2_count(c.set), 1);
        for (const auto& n : c.set.nodes())
          if (n.op == ExprNode::Op::Var) {
            EXPECT_GE(n.var, 0);
            EXPECT_LT(n.var, static_cast<int>(c.set.vars().size()));
          }
        std::set<std::string> names;
        for (const auto& v : c.set.vars())
          EXPECT_TRUE(names.insert(v.name).second) << v.name;
        std::set<std::pair<int, ValueId>> leaf_tags;
        for (const auto& [var, leaf] : c.leaves)
          EXPECT_TRUE(leaf_tags.insert({static_cast<int>(leaf.origin), leaf.tag}).second);
      }
}

INSTANTIATE_TEST_SUITE_P(Corpus, CorpusConstraints, ::testing::ValuesIn(test::corpus_files()),
                         test::param_name);

// A concrete out-of-bounds execution, written as an assignment, satisfies the set.
TEST(ConstraintGen, ConcreteViolationSatisfiesSet) {
  Built b(test::read_file(test::corpus_path("ports/fluid_adv.mcu")));
  ConstraintBuild c = b.build("cubD", CheckKind::Upper);
  std::map<std::string, std::int64_t> a{
      {"solTidX", 15}, {"solTidY", 15}, {"solTidZ", 0},  {"solBidX", 0},    {"solBidY", 0},
      {"solBidZ", 0},  {"solBDimX", 16}, {"solBDimY", 16}, {"solBDimZ", 1}, {"solGDimX", 1},
      {"solGDimY", 1}, {"solGDimZ", 1},  {"solCubN", 1},  {"solNelements", 1},
      {"solOffset", 255}, {"solSize", 24}};
  std::vector<std::int64_t> model(c.set.vars().size(), 0);
  for (std::size_t i = 0; i < model.size(); ++i) {
    ASSERT_TRUE(a.count(c.set.vars()[i].name)) << c.set.vars()[i].name;
    model[i] = a[c.set.vars()[i].name];
  }
  for (const auto& con : c.set.constraints())
    EXPECT_TRUE(satisfied(c.set, con, model)) << con.origin;
}

TEST(ConstraintGen, LayoutCheck) {
  Built b("__global__ void k(int a, int c) {\n"
          "  extern __shared__ int s[];\n"
          "  int* p = &s[a];\n"
          "  int* q = &s[c];\n"
          "  q[0] = p[0];\n"
          "}\n"
          "void main() { int a = __input(); int c = __input(); k<<<1, 1, 64>>>(a, c); }");
  const PartitionList& list = b.kernels[0].partitions.at(0);
  ConstraintBuild c = build_layout_check(list, 1, b.host, b.kernels[0], b.host.launches[0]);
  EXPECT_EQ(kind2_count(c.set), 1);
  EXPECT_EQ(solve(c.set).kind, Verdict::Kind::Sat);
  ConstraintBuild first = build_layout_check(list, 0, b.host, b.kernels[0], b.host.launches[0]);
  EXPECT_EQ(solve(first.set).kind, Verdict::Kind::Unsat);
}

} // namespace
} // namespace scuba
