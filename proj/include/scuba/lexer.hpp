#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "scuba/source.hpp"

namespace scuba {

enum class TokenKind {
  Ident,
  IntLit,
  FloatLit,
  // keywords
  KwGlobal,    // __global__
  KwShared,    // __shared__
  KwExtern,
  KwVoid,
  KwInt,
  KwUnsigned,
  KwLong,
  KwSizeT,
  KwFloat,
  KwDouble,
  KwConst,
  KwFor,
  KwIf,
  KwElse,
  KwReturn,
  KwInput,     // __input
  KwMalloc,    // cudaMalloc
  KwFree,      // cudaFree
  KwAssert,
  KwDim3,
  KwAtomicMin,
  KwAtomicMax,
  KwAtomicAdd,
  // punctuation
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Semi,
  Comma,
  Dot,
  Assign,
  PlusAssign,
  PlusPlus,
  Plus,
  Minus,
  Star,
  Slash,
  Percent,
  Amp,
  AndAnd,
  Less,
  LessEq,
  Greater,
  GreaterEq,
  EqEq,
  NotEq,
  LaunchOpen,  // <<<
  LaunchClose, // >>>
  Eof,
};

const char* token_kind_name(TokenKind kind);

struct Token {
  TokenKind kind;
  std::string text;
  SourceLocation loc;
  std::int64_t int_value = 0;
  double float_value = 0.0;

  bool operator==(const Token& other) const {
    return kind == other.kind && text == other.text && loc == other.loc;
  }
};

/// Splits MiniCUDA source into tokens. Comments and whitespace are dropped.
/// Throws FrontendError(Lexical) at the first character outside the grammar.
/// The returned sequence always ends with an Eof token.
std::vector<Token> tokenize(std::string_view source, const std::string& file = "<input>");

} // namespace scuba
