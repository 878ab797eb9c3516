#include <gtest/gtest.h>

#include "scuba/lexer.hpp"
#include "test_util.hpp"

namespace scuba {
namespace {

using K = TokenKind;

std::vector<K> token_kinds(const std::string& src) {
  std::vector<K> out;
  for (const auto& t : tokenize(src))
    out.push_back(t.kind);
  return out;
}

TEST(Lexer, InputAssignment) {
  EXPECT_EQ(token_kinds("x = __input();"),
            (std::vector<K>{K::Ident, K::Assign, K::KwInput, K::LParen, K::RParen, K::Semi, K::Eof}));
}

TEST(Lexer, LaunchChevronsAreSingleTokens) {
  auto toks = tokenize("saxpy<<<gridDim, blkDim>>>(array, n);");
  ASSERT_GE(toks.size(), 6u);
  EXPECT_EQ(toks[1].kind, K::LaunchOpen);
  EXPECT_EQ(toks[1].text, "<<<");
  EXPECT_EQ(toks[5].kind, K::LaunchClose);
  EXPECT_EQ(toks[5].text, ">>>");
}

TEST(Lexer, IllegalCharacterReportsLocation) {
  try {
    tokenize("int @x", "f.mcu");
    FAIL() << "expected a lexical error";
  } catch (const FrontendError& e) {
    EXPECT_EQ(e.kind(), FrontendError::Kind::Lexical);
    EXPECT_EQ(e.location().line, 1);
    EXPECT_EQ(e.location().column, 5);
  }
}

TEST(Lexer, CommentsAndWhitespaceDropped) {
  EXPECT_EQ(token_kinds("// c\n  /* block\n */ x"), (std::vector<K>{K::Ident, K::Eof}));
}

TEST(Lexer, LocationsAreOneBased) {
  auto toks = tokenize("a\n  b");
  EXPECT_EQ(toks[0].loc.line, 1);
  EXPECT_EQ(toks[0].loc.column, 1);
  EXPECT_EQ(toks[1].loc.line, 2);
  EXPECT_EQ(toks[1].loc.column, 3);
}

int count_stmts(const std::vector<StmtPtr>& list, Stmt::Kind kind, Stmt::Init init = Stmt::Init::None,
                bool match_init = false) {
  int n = 0;
  for (const auto& s : list) {
    if (s->kind == kind && (!match_init || s->init == init))
      ++n;
    n += count_stmts(s->body, kind, init, match_init);
    n += count_stmts(s->else_body, kind, init, match_init);
  }
  return n;
}

TEST(Parser, SaxpyShape) {
  Ast ast = parse_file(test::corpus_path("ports/saxpy.mcu"));
  EXPECT_EQ(ast.kernels.size(), 1u);
  EXPECT_EQ(count_stmts(ast.host_main, Stmt::Kind::Launch), 1);
  EXPECT_EQ(count_stmts(ast.host_main, Stmt::Kind::Decl, Stmt::Init::Malloc, true), 1);
}

TEST(Parser, EmptyFile) {
  Ast ast = parse_source("", "empty.mcu");
  EXPECT_TRUE(ast.kernels.empty());
  EXPECT_TRUE(ast.host_main.empty());
}

TEST(Parser, UndefinedKernelIsNameError) {
  try {
    parse_source("void main() { int* p = cudaMalloc(4); k<<<1, 1>>>(p); }");
    FAIL() << "expected a name error";
  } catch (const FrontendError& e) {
    EXPECT_EQ(e.kind(), FrontendError::Kind::Name);
  }
}

TEST(Parser, UndeclaredIdentifierIsNameError) {
  EXPECT_THROW(parse_source("void main() { int x = y + 1; }"), FrontendError);
}

TEST(Parser, LaunchArityMismatch) {
  const char* src = "__global__ void k(int* a, int n) { a[0] = n; }\n"
                    "void main() { int* p = cudaMalloc(4); k<<<1, 1>>>(p); }";
  EXPECT_THROW(parse_source(src), FrontendError);
}

TEST(Parser, SyntaxErrorNamesFoundToken) {
  try {
    parse_source("void main() { int x = ; }");
    FAIL();
  } catch (const FrontendError& e) {
    EXPECT_EQ(e.kind(), FrontendError::Kind::Syntax);
    EXPECT_NE(std::string(e.what()).find("found"), std::string::npos);
  }
}

TEST(Parser, ReassignmentRejected) {
  EXPECT_THROW(parse_source("void main() { int x = 1; x = 2; }"), FrontendError);
}

TEST(Parser, DuplicateKernelRejected) {
  EXPECT_THROW(parse_source("__global__ void k(int n) { }\n__global__ void k(int n) { }\nvoid main() { }"),
               FrontendError);
}

TEST(Parser, MissingFileIsIoError) {
  try {
    parse_file("/nonexistent/missing.mcu");
    FAIL();
  } catch (const FrontendError& e) {
    EXPECT_EQ(e.kind(), FrontendError::Kind::Io);
  }
}

class CorpusFrontend : public ::testing::TestWithParam<std::string> {};

TEST_P(CorpusFrontend, PrintParseRoundTrip) {
  Ast a = parse_file(GetParam());
  std::string printed = print_ast(a);
  Ast b = parse_source(printed, a.file);
  EXPECT_TRUE(structurally_equal(a, b)) << printed;
  EXPECT_EQ(print_ast(b), printed);
}

TEST_P(CorpusFrontend, LocationsWithinFile) {
  Ast a = parse_file(GetParam());
  for_each_location(a, [&](const SourceLocation& loc) {
    EXPECT_GE(loc.line, 1);
    EXPECT_LE(loc.line, a.line_count);
    EXPECT_GE(loc.column, 1);
  });
}

TEST_P(CorpusFrontend, Deterministic) {
  std::string text = test::read_file(GetParam());
  Ast a = parse_source(text, "x.mcu");
  Ast b = parse_source(text, "x.mcu");
  EXPECT_TRUE(structurally_equal(a, b));
  bool same_locs = true;
  std::vector<SourceLocation> la, lb;
  for_each_location(a, [&](const SourceLocation& l) { la.push_back(l); });
  for_each_location(b, [&](const SourceLocation& l) { lb.push_back(l); });
  same_locs = la == lb;
  EXPECT_TRUE(same_locs);
}

INSTANTIATE_TEST_SUITE_P(Corpus, CorpusFrontend, ::testing::ValuesIn(test::corpus_files()), test::param_name);

} // namespace
} // namespace scuba
