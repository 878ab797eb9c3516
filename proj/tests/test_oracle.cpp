#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "scuba/oracle.hpp"
#include "test_util.hpp"

namespace scuba {
namespace {

Ast load(const std::string& rel) {
  std::string path = test::corpus_path(rel);
  return parse_source(test::read_file(path), path);
}

std::uint64_t violations_at(const ExecutionTrace& t, int line, int column) {
  std::uint64_t n = 0;
  for (const auto& a : t.accesses)
    if (a.location.line == line && a.location.column == column && !a.in_bounds && a.legal)
      ++n;
  return n;
}

TEST(Oracle, FluidSmallInputs) {
  OracleOptions o;
  o.inputs = {1, 1};
  ExecutionTrace t = interpret(load("ports/fluid_adv.mcu"), o);
  EXPECT_EQ(t.access_count, 512u);
  EXPECT_EQ(violations_at(t, 7, 18), 256u - 24u);
  std::int64_t max_offset = 0;
  for (const auto& a : t.accesses)
    if (a.location.line == 7 && a.location.column == 18) {
      max_offset = std::max(max_offset, a.offset);
      EXPECT_EQ(a.size, 24);
      EXPECT_EQ(a.space, "global");
    }
  EXPECT_EQ(max_offset, 255);
  EXPECT_EQ(violations_at(t, 7, 3), 0u);
}

// Closed form: each of the Nelements blocks reads cubD[0..255] against a
// size of 3 * Nelements * (cubN + 1)^3.
TEST(Oracle, FluidViolationCountMatchesClosedForm) {
  Ast ast = load("ports/fluid_adv.mcu");
  for (std::int64_t cub = 0; cub <= 4; ++cub)
    for (std::int64_t ne = 0; ne <= 3; ++ne) {
      OracleOptions o;
      o.inputs = {cub, ne};
      ExecutionTrace t = interpret(ast, o);
      std::int64_t size = 3 * ne * (cub + 1) * (cub + 1) * (cub + 1);
      std::int64_t per_block = std::max<std::int64_t>(0, 256 - size);
      EXPECT_EQ(violations_at(t, 7, 18), static_cast<std::uint64_t>(ne * per_block)) << cub << "," << ne;
      EXPECT_EQ(t.launches, 1);
    }
}

TEST(Oracle, SaxpyInBounds) {
  OracleOptions o;
  o.inputs = {2};
  ExecutionTrace t = interpret(load("ports/saxpy.mcu"), o);
  EXPECT_EQ(t.access_count, 1024u);
  for (const auto& a : t.accesses)
    EXPECT_TRUE(a.in_bounds);
  EXPECT_TRUE(t.errors.empty());
}

TEST(Oracle, LudTileCounts) {
  ExecutionTrace clean = interpret(load("ports/lud16.mcu"));
  EXPECT_EQ(violations_at(clean, 8, 22), 0u);
  ExecutionTrace bad = interpret(load("ports/lud17.mcu"));
  // 4 blocks of 256 threads read m[row * 17 + col] with size 289.
  std::uint64_t expected = 0;
  for (int by = 0; by < 2; ++by)
    for (int bx = 0; bx < 2; ++bx)
      for (int ty = 0; ty < 16; ++ty)
        for (int tx = 0; tx < 16; ++tx)
          if ((by * 16 + ty) * 17 + bx * 16 + tx >= 289)
            ++expected;
  EXPECT_GT(expected, 0u);
  EXPECT_EQ(violations_at(bad, 8, 22), expected);
}

TEST(Oracle, SharedPartitionIntraViolation) {
  OracleOptions o;
  o.inputs = {2, 3};
  Ast ast = load("ports/sosfilt_bump.mcu");
  ExecutionTrace t = interpret(ast, o);
  bool intra = false;
  for (const auto& a : t.accesses)
    if (a.intra_violation) {
      intra = true;
      EXPECT_TRUE(a.partitioned);
      EXPECT_EQ(a.space, "shared-dynamic-partition");
    }
  EXPECT_TRUE(intra);
  OracleOptions c;
  c.inputs = {2, 3};
  for (const auto& a : interpret(load("ports/sosfilt.mcu"), c).accesses)
    EXPECT_TRUE(a.in_bounds);
}

TEST(Oracle, BruteForceFluidSat) {
  Ast ast = load("ports/fluid_adv.mcu");
  EXPECT_TRUE(brute_force_verdict(ast, SourceLocation{ast.file, 7, 18}, 4));
  EXPECT_FALSE(brute_force_verdict(ast, SourceLocation{ast.file, 7, 3}, 4));
}

TEST(Oracle, BruteForceSosfiltUnsat) {
  Ast ast = load("ports/sosfilt.mcu");
  BruteForceResult r = brute_force(ast, 4);
  EXPECT_GT(r.legal_runs, 0u);
  for (const auto& [loc, s] : r.sites)
    EXPECT_FALSE(s.upper || s.underflow) << loc.line << ":" << loc.column;
}

TEST(Oracle, BruteForceRespectsHostAssert) {
  std::string src =
      "__global__ void k(int* q, int n) {\n  q[n - 100] = 1;\n}\n"
      "void main() {\n  int n = __input();\n  assert(n > 100);\n  int* p = cudaMalloc(1);\n"
      "  k<<<1, 1>>>(p, n);\n}\n";
  Ast ast = parse_source(src, "t.mcu");
  BruteForceResult r = brute_force(ast, 64);
  EXPECT_EQ(r.tuples, 65u);
  EXPECT_EQ(r.legal_runs, 0u);
  EXPECT_FALSE(brute_force_verdict(ast, SourceLocation{"t.mcu", 2, 3}, 64));
}

TEST(Oracle, KernelAssertMakesAccessIllegal) {
  std::string src =
      "__global__ void k(int* q, int n) {\n  q[n] = 1;\n  assert(n < 1);\n}\n"
      "void main() {\n  int* p = cudaMalloc(1);\n  k<<<1, 1>>>(p, 5);\n}\n";
  ExecutionTrace t = interpret(parse_source(src, "t.mcu"));
  ASSERT_EQ(t.accesses.size(), 1u);
  EXPECT_FALSE(t.accesses[0].in_bounds);
  EXPECT_FALSE(t.accesses[0].legal);
  EXPECT_FALSE(t.sites.begin()->second.upper);
}

TEST(Oracle, LimitErrors) {
  std::string src = "void main() {\n";
  for (int i = 0; i < 6; ++i)
    src += "  int a" + std::to_string(i) + " = __input();\n";
  src += "}\n";
  Ast ast = parse_source(src, "t.mcu");
  EXPECT_THROW(brute_force(ast, 4), OracleLimitError);
  EXPECT_THROW(brute_force(load("ports/saxpy.mcu"), 65), OracleLimitError);
  EXPECT_THROW(brute_force(load("ports/saxpy.mcu"), -1), OracleLimitError);
}

TEST(Oracle, RuntimeErrorsAreEvents) {
  ExecutionTrace div = interpret(parse_source("void main() {\n  int a = 0;\n  int b = 4 / a;\n}\n", "t.mcu"));
  ASSERT_EQ(div.errors.size(), 1u);
  EXPECT_EQ(div.errors[0].location.line, 3);
  EXPECT_TRUE(div.aborted);
  ExecutionTrace neg =
      interpret(parse_source("void main() {\n  int* p = cudaMalloc(0 - 3);\n}\n", "t.mcu"));
  ASSERT_EQ(neg.errors.size(), 1u);
  EXPECT_TRUE(neg.aborted);
  ExecutionTrace missing = interpret(parse_source("void main() {\n  int a = __input();\n}\n", "t.mcu"));
  ASSERT_EQ(missing.errors.size(), 1u);
  EXPECT_NE(missing.errors[0].message.find("__input"), std::string::npos);
}

TEST(Oracle, InputSitesOverrideOrder) {
  Ast ast = load("ports/fluid_adv.mcu");
  std::vector<SourceLocation> sites = input_sites(ast);
  ASSERT_EQ(sites.size(), 2u);
  EXPECT_EQ(sites[0].line, 11);
  OracleOptions o;
  o.input_sites[sites[0]] = 0;
  o.input_sites[sites[1]] = 1;
  ExecutionTrace t = interpret(ast, o);
  EXPECT_EQ(t.inputs_used, (std::vector<std::int64_t>{0, 1}));
  EXPECT_EQ(violations_at(t, 7, 18), 253u);
}

TEST(Oracle, KernelAccessSites) {
  std::vector<SourceLocation> s = kernel_access_sites(load("ports/fluid_adv.mcu"));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].column, 3);
  EXPECT_EQ(s[1].column, 18);
}

TEST(Oracle, Deterministic) {
  for (const auto& path : test::corpus_files()) {
    Ast ast = parse_source(test::read_file(path), path);
    OracleOptions o;
    o.default_input = 2;
    EXPECT_EQ(trace_to_json_lines(interpret(ast, o)), trace_to_json_lines(interpret(ast, o))) << path;
  }
}

TEST(Oracle, JsonLines) {
  OracleOptions o;
  o.inputs = {0, 1};
  std::string text = trace_to_json_lines(interpret(load("ports/fluid_adv.mcu"), o));
  std::vector<nlohmann::json> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    lines.push_back(nlohmann::json::parse(text.substr(pos, nl - pos)));
    pos = nl + 1;
  }
  ASSERT_EQ(lines.size(), 513u);
  EXPECT_EQ(lines.front()["event"], "access");
  EXPECT_EQ(lines.back()["event"], "summary");
  EXPECT_EQ(lines.back()["accesses"], 512);
  EXPECT_EQ(lines.back()["violations"], 253);
  EXPECT_EQ(lines.back()["inputs"], nlohmann::json::array({0, 1}));
}

TEST(Oracle, UafEvents) {
  ExecutionTrace t = interpret(load("uaf/kernel_use_after_free.mcu"));
  std::set<std::pair<int, int>> at;
  for (const auto& e : t.temporal) {
    EXPECT_EQ(e.kind, "uaf");
    at.emplace(e.location.line, e.location.column);
  }
  EXPECT_EQ(at, (std::set<std::pair<int, int>>{{3, 3}, {3, 10}, {10, 3}}));
  ExecutionTrace d = interpret(load("uaf/double_free.mcu"));
  ASSERT_EQ(d.temporal.size(), 1u);
  EXPECT_EQ(d.temporal[0].kind, "double-free");
  EXPECT_EQ(d.temporal[0].location.line, 6);
}

} // namespace
} // namespace scuba
