#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "scuba/oracle.hpp"
#include "test_util.hpp"

namespace scuba {
namespace {

using Found = std::set<std::tuple<std::string, int, int, std::string>>;

Found found(const AnalysisResult& r) {
  Found out;
  for (const auto& d : r.diagnostics)
    out.emplace(diagnostic_kind_name(d.kind), d.location.line, d.location.column, d.target);
  return out;
}

AnalysisResult analyze_corpus(const std::string& rel, AnalysisOptions o = {}) {
  std::string path = test::corpus_path(rel);
  return analyze_source(test::read_file(path), path, o);
}

struct Expectation {
  const char* file;
  Found diagnostics;
};

const std::vector<Expectation>& expectations() {
  static const std::vector<Expectation> e = {
      {"ports/fluid_adv.mcu", {{"oob-upper", 7, 18, "cubD"}}},
      {"ports/push.mcu", {{"oob-upper", 7, 18, "data1"}}},
      {"ports/sosfilt.mcu", {}},
      {"ports/sosfilt_bump.mcu", {{"intra-allocation-oob", 9, 5, "s_zi"}}},
      {"ports/kalman.mcu", {}},
      {"ports/kalman_rd1.mcu", {{"oob-upper", 7, 5, "l_RQR"}, {"oob-upper", 8, 5, "l_T"}}},
      {"ports/lud16.mcu", {}},
      {"ports/lud17.mcu", {{"oob-upper", 8, 22, "m"}}},
      {"ports/saxpy.mcu", {}},
      {"micro/global_oob.mcu", {{"oob-upper", 3, 3, "a"}}},
      {"micro/local_oob.mcu", {{"oob-upper", 5, 5, "buf"}}},
      {"micro/static_shared_oob.mcu", {{"oob-upper", 4, 3, "s"}}},
      {"micro/dynamic_shared_oob.mcu", {{"oob-upper", 4, 3, "buf"}}},
      {"clean/guarded.mcu", {}},
      {"clean/kalman.mcu", {}},
      {"clean/lud16.mcu", {}},
      {"clean/matrix_2d.mcu", {}},
      {"clean/partitions.mcu", {}},
      {"clean/reduce_shared.mcu", {}},
      {"clean/saxpy.mcu", {}},
      {"clean/sosfilt.mcu", {}},
      {"clean/stencil.mcu", {}},
      {"uaf/launch_after_free.mcu", {{"uaf", 9, 3, "p"}}},
      {"uaf/kernel_use_after_free.mcu", {{"uaf", 3, 3, "p"}, {"uaf", 3, 10, "p"}, {"uaf", 10, 3, "p"}}},
      {"uaf/branch_free.mcu", {{"uaf", 3, 3, "p"}, {"uaf", 12, 3, "p"}}},
      {"uaf/double_free.mcu", {{"double-free", 6, 3, "p"}}},
      {"uaf/live_use.mcu", {}},
      {"uaf/branch_launch_live.mcu", {}},
  };
  return e;
}

TEST(Analyzer, EveryCorpusFileHasAnExpectation) {
  std::set<std::string> listed;
  for (const auto& e : expectations())
    listed.insert(test::corpus_path(e.file));
  for (const auto& f : test::corpus_files())
    EXPECT_TRUE(listed.count(f)) << f;
}

TEST(Analyzer, CorpusDiagnostics) {
  for (const auto& e : expectations()) {
    AnalysisResult r = analyze_corpus(e.file);
    EXPECT_EQ(found(r), e.diagnostics) << e.file;
    EXPECT_EQ(r.diagnostics.size(), e.diagnostics.size()) << e.file;
    EXPECT_EQ(r.has_bugs(), !e.diagnostics.empty()) << e.file;
  }
}

TEST(Analyzer, FluidWitnessGivesSmallSize) {
  AnalysisResult r = analyze_corpus("ports/fluid_adv.mcu");
  ASSERT_EQ(r.diagnostics.size(), 1u);
  const auto& w = *r.diagnostics[0].witness;
  std::int64_t cub = w.at("cubN"), ne = w.at("Nelements");
  EXPECT_LT(3 * ne * (cub + 1) * (cub + 1) * (cub + 1), 256);
  EXPECT_GE(ne, 1);
}

TEST(Analyzer, PushWitnessNamesLoadedValue) {
  AnalysisResult r = analyze_corpus("ports/push.mcu");
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_TRUE(r.diagnostics[0].witness->count("neighbor"));
}

// Each witness, fed back through the interpreter, produces a legal violation
// at the reported site.
TEST(Analyzer, WitnessesReplay) {
  for (const auto& e : expectations()) {
    std::string path = test::corpus_path(e.file);
    Ast ast = parse_source(test::read_file(path), path);
    AnalysisResult r = analyze_corpus(e.file);
    for (const auto& d : r.diagnostics) {
      if (!d.witness)
        continue;
      OracleOptions o;
      o.default_input = 0;
      for (const auto& w : d.witness_sites)
        (w.origin == UnknownOrigin::Load ? o.load_overrides : o.input_sites)[w.site] = w.value;
      ExecutionTrace t = interpret(ast, o);
      auto it = t.sites.find(d.location);
      ASSERT_NE(it, t.sites.end()) << e.file;
      bool violated = it->second.upper || it->second.underflow;
      EXPECT_TRUE(violated) << to_text(d);
      if (d.kind == DiagnosticKind::IntraAllocationOob) {
        EXPECT_TRUE(it->second.intra) << to_text(d);
      }
    }
  }
}

TEST(Analyzer, Deterministic) {
  for (const auto& e : expectations()) {
    std::string a = to_json_lines(analyze_corpus(e.file).diagnostics);
    AnalysisOptions seeded;
    seeded.seed = 99;
    EXPECT_EQ(a, to_json_lines(analyze_corpus(e.file).diagnostics)) << e.file;
    EXPECT_EQ(found(analyze_corpus(e.file)), found(analyze_corpus(e.file, seeded))) << e.file;
  }
}

TEST(Analyzer, CheckSelection) {
  AnalysisOptions uaf_only;
  uaf_only.check_oob = false;
  EXPECT_TRUE(analyze_corpus("ports/fluid_adv.mcu", uaf_only).diagnostics.empty());
  EXPECT_EQ(analyze_corpus("uaf/double_free.mcu", uaf_only).diagnostics.size(), 1u);
  AnalysisOptions oob_only;
  oob_only.check_uaf = false;
  EXPECT_TRUE(analyze_corpus("uaf/branch_free.mcu", oob_only).diagnostics.empty());
  EXPECT_EQ(analyze_corpus("ports/lud17.mcu", oob_only).diagnostics.size(), 1u);
}

const char* kUnderflow =
    "__global__ void k(int* a, int n) {\n  int i = threadIdx.x;\n  a[i - n] = 1;\n}\n"
    "void main() {\n  int n = __input();\n  int* a = cudaMalloc(64);\n  k<<<1, 128>>>(a, n);\n}\n";

TEST(Analyzer, UnderflowToggle) {
  AnalysisResult r = test::analyze_text(kUnderflow);
  EXPECT_EQ(test::kinds(r), (std::vector<std::string>{"oob-upper", "oob-underflow"}));
  AnalysisOptions o;
  o.underflow = false;
  EXPECT_EQ(test::kinds(test::analyze_text(kUnderflow, o)), (std::vector<std::string>{"oob-upper"}));
}

TEST(Analyzer, MaxDomainLimitsInputs) {
  const char* src =
      "__global__ void k(int* a, int n) {\n  a[n] = 1;\n}\n"
      "void main() {\n  int n = __input();\n  int* a = cudaMalloc(100);\n  k<<<1, 1>>>(a, n);\n}\n";
  AnalysisOptions small;
  small.max_domain = 99;
  small.underflow = false;
  EXPECT_TRUE(test::analyze_text(src, small).diagnostics.empty());
  small.max_domain = 100;
  EXPECT_EQ(test::analyze_text(src, small).diagnostics.size(), 1u);
}

TEST(Analyzer, UnknownSizeIsUnverifiable) {
  const char* src = "__global__ void k(int* a) {\n  a[0] = 1;\n}\n"
                    "void main() {\n  int* p;\n  k<<<1, 1>>>(p);\n}\n";
  AnalysisResult r = test::analyze_text(src);
  EXPECT_EQ(test::kinds(r), (std::vector<std::string>{"unverifiable"}));
  EXPECT_FALSE(r.has_bugs());
  EXPECT_TRUE(r.has_bugs(true));
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Analyzer, OverflowIsUnverifiable) {
  const char* src =
      "__global__ void k(int* a, int n) {\n  a[n + 2000000 * 2000000] = 1;\n}\n"
      "void main() {\n  int n = __input();\n  int* a = cudaMalloc(n);\n  k<<<1, 1>>>(a, n);\n}\n";
  AnalysisResult r = test::analyze_text(src);
  ASSERT_FALSE(r.diagnostics.empty());
  for (const auto& d : r.diagnostics)
    EXPECT_EQ(d.kind, DiagnosticKind::Unverifiable);
}

TEST(Analyzer, SuspiciousLayoutIsNotABug) {
  const char* src =
      "__global__ void k(int n) {\n  extern __shared__ int smem[];\n  int* a = smem;\n"
      "  int* b = &a[n - 4];\n  b[0] = 1;\n}\n"
      "void main() {\n  int n = __input();\n  assert(n >= 8);\n  k<<<1, 1, n * 4>>>(n);\n}\n";
  AnalysisResult r = test::analyze_text(src);
  bool layout = false;
  for (const auto& d : r.diagnostics)
    if (d.kind == DiagnosticKind::SuspiciousPartitionLayout) {
      layout = true;
      EXPECT_EQ(d.location.line, 4);
    }
  EXPECT_FALSE(layout);
  const char* bad =
      "__global__ void k(int n) {\n  extern __shared__ int smem[];\n  int* a = smem;\n"
      "  int* b = &a[n - 4];\n  b[0] = 1;\n}\n"
      "void main() {\n  int n = __input();\n  k<<<1, 1, 64>>>(n);\n}\n";
  AnalysisResult rb = test::analyze_text(bad);
  bool flagged = false;
  for (const auto& d : rb.diagnostics)
    if (d.kind == DiagnosticKind::SuspiciousPartitionLayout) {
      flagged = true;
      EXPECT_EQ(d.location.line, 4);
    }
  EXPECT_TRUE(flagged);
}

TEST(Analyzer, GuardedAccessIsClean) {
  const char* src =
      "__global__ void k(int* a, int n) {\n  int i = threadIdx.x + blockIdx.x * blockDim.x;\n"
      "  if (i < n) {\n    a[i] = 1;\n  }\n}\n"
      "void main() {\n  int n = __input();\n  int* a = cudaMalloc(n);\n  k<<<(n + 31) / 32, 32>>>(a, n);\n}\n";
  EXPECT_TRUE(test::analyze_text(src).diagnostics.empty());
}

TEST(Analyzer, UnguardedAccessIsFlagged) {
  const char* src =
      "__global__ void k(int* a, int n) {\n  int i = threadIdx.x + blockIdx.x * blockDim.x;\n"
      "  a[i] = 1;\n}\n"
      "void main() {\n  int n = __input();\n  int* a = cudaMalloc(n);\n  k<<<(n + 31) / 32, 32>>>(a, n);\n}\n";
  EXPECT_EQ(test::kinds(test::analyze_text(src)), (std::vector<std::string>{"oob-upper"}));
}

TEST(Analyzer, AccessResultsCoverEveryAccessAndCheck) {
  AnalysisResult r = analyze_corpus("ports/fluid_adv.mcu");
  EXPECT_EQ(r.accesses.size(), 4u);
  int sat = 0;
  for (const auto& a : r.accesses)
    sat += a.outcome == AccessResult::Outcome::Sat;
  EXPECT_EQ(sat, 1);
}

TEST(Analyzer, SortedOutput) {
  for (const auto& e : expectations()) {
    AnalysisResult r = analyze_corpus(e.file);
    std::vector<Diagnostic> s = r.diagnostics;
    sort_diagnostics(s);
    EXPECT_EQ(s, r.diagnostics) << e.file;
  }
}

} // namespace
} // namespace scuba
