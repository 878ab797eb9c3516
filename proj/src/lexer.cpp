#include "scuba/lexer.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <unordered_map>

namespace scuba {

const char* token_kind_name(TokenKind kind) {
  switch (kind) {
  case TokenKind::Ident: return "identifier";
  case TokenKind::IntLit: return "integer literal";
  case TokenKind::FloatLit: return "floating-point literal";
  case TokenKind::KwGlobal: return "'__global__'";
  case TokenKind::KwShared: return "'__shared__'";
  case TokenKind::KwExtern: return "'extern'";
  case TokenKind::KwVoid: return "'void'";
  case TokenKind::KwInt: return "'int'";
  case TokenKind::KwUnsigned: return "'unsigned'";
  case TokenKind::KwLong: return "'long'";
  case TokenKind::KwSizeT: return "'size_t'";
  case TokenKind::KwFloat: return "'float'";
  case TokenKind::KwDouble: return "'double'";
  case TokenKind::KwConst: return "'const'";
  case TokenKind::KwFor: return "'for'";
  case TokenKind::KwIf: return "'if'";
  case TokenKind::KwElse: return "'else'";
  case TokenKind::KwReturn: return "'return'";
  case TokenKind::KwInput: return "'__input'";
  case TokenKind::KwMalloc: return "'cudaMalloc'";
  case TokenKind::KwFree: return "'cudaFree'";
  case TokenKind::KwAssert: return "'assert'";
  case TokenKind::KwDim3: return "'dim3'";
  case TokenKind::KwAtomicMin: return "'atomicMin'";
  case TokenKind::KwAtomicMax: return "'atomicMax'";
  case TokenKind::KwAtomicAdd: return "'atomicAdd'";
  case TokenKind::LParen: return "'('";
  case TokenKind::RParen: return "')'";
  case TokenKind::LBrace: return "'{'";
  case TokenKind::RBrace: return "'}'";
  case TokenKind::LBracket: return "'['";
  case TokenKind::RBracket: return "']'";
  case TokenKind::Semi: return "';'";
  case TokenKind::Comma: return "','";
  case TokenKind::Dot: return "'.'";
  case TokenKind::Assign: return "'='";
  case TokenKind::PlusAssign: return "'+='";
  case TokenKind::PlusPlus: return "'++'";
  case TokenKind::Plus: return "'+'";
  case TokenKind::Minus: return "'-'";
  case TokenKind::Star: return "'*'";
  case TokenKind::Slash: return "'/'";
  case TokenKind::Percent: return "'%'";
  case TokenKind::Amp: return "'&'";
  case TokenKind::AndAnd: return "'&&'";
  case TokenKind::Less: return "'<'";
  case TokenKind::LessEq: return "'<='";
  case TokenKind::Greater: return "'>'";
  case TokenKind::GreaterEq: return "'>='";
  case TokenKind::EqEq: return "'=='";
  case TokenKind::NotEq: return "'!='";
  case TokenKind::LaunchOpen: return "'<<<'";
  case TokenKind::LaunchClose: return "'>>>'";
  case TokenKind::Eof: return "end of file";
  }
  return "token";
}

namespace {

const std::unordered_map<std::string_view, TokenKind>& keywords() {
  static const std::unordered_map<std::string_view, TokenKind> table = {
      {"__global__", TokenKind::KwGlobal}, {"__shared__", TokenKind::KwShared},
      {"extern", TokenKind::KwExtern},     {"void", TokenKind::KwVoid},
      {"int", TokenKind::KwInt},           {"unsigned", TokenKind::KwUnsigned},
      {"long", TokenKind::KwLong},         {"size_t", TokenKind::KwSizeT},
      {"float", TokenKind::KwFloat},       {"double", TokenKind::KwDouble},
      {"const", TokenKind::KwConst},       {"for", TokenKind::KwFor},
      {"if", TokenKind::KwIf},             {"else", TokenKind::KwElse},
      {"return", TokenKind::KwReturn},     {"__input", TokenKind::KwInput},
      {"cudaMalloc", TokenKind::KwMalloc}, {"cudaFree", TokenKind::KwFree},
      {"assert", TokenKind::KwAssert},     {"dim3", TokenKind::KwDim3},
      {"atomicMin", TokenKind::KwAtomicMin}, {"atomicMax", TokenKind::KwAtomicMax},
      {"atomicAdd", TokenKind::KwAtomicAdd},
  };
  return table;
}

class Lexer {
public:
  Lexer(std::string_view src, const std::string& file) : src_(src), file_(file) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      if (pos_ >= src_.size()) {
        out.push_back(Token{TokenKind::Eof, "", here()});
        return out;
      }
      out.push_back(next());
    }
  }

private:
  SourceLocation here() const { return SourceLocation{file_, line_, col_}; }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && peek() != '\n')
          advance();
      } else if (c == '/' && peek(1) == '*') {
        SourceLocation start = here();
        advance();
        advance();
        while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/'))
          advance();
        if (pos_ >= src_.size())
          throw FrontendError(FrontendError::Kind::Lexical, start, "unterminated block comment");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  Token make(TokenKind kind, SourceLocation loc, std::size_t start) {
    return Token{kind, std::string(src_.substr(start, pos_ - start)), std::move(loc)};
  }

  Token next() {
    SourceLocation loc = here();
    std::size_t start = pos_;
    char c = peek();

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
        advance();
      Token tok = make(TokenKind::Ident, loc, start);
      if (auto it = keywords().find(tok.text); it != keywords().end())
        tok.kind = it->second;
      return tok;
    }

    if (std::isdigit(static_cast<unsigned char>(c)))
      return number(loc, start);

    auto single = [&](TokenKind kind) {
      advance();
      return make(kind, loc, start);
    };
    auto pair = [&](TokenKind kind) {
      advance();
      advance();
      return make(kind, loc, start);
    };

    switch (c) {
    case '(': return single(TokenKind::LParen);
    case ')': return single(TokenKind::RParen);
    case '{': return single(TokenKind::LBrace);
    case '}': return single(TokenKind::RBrace);
    case '[': return single(TokenKind::LBracket);
    case ']': return single(TokenKind::RBracket);
    case ';': return single(TokenKind::Semi);
    case ',': return single(TokenKind::Comma);
    case '.': return single(TokenKind::Dot);
    case '*': return single(TokenKind::Star);
    case '/': return single(TokenKind::Slash);
    case '%': return single(TokenKind::Percent);
    case '-': return single(TokenKind::Minus);
    case '+':
      if (peek(1) == '+') return pair(TokenKind::PlusPlus);
      if (peek(1) == '=') return pair(TokenKind::PlusAssign);
      return single(TokenKind::Plus);
    case '&':
      if (peek(1) == '&') return pair(TokenKind::AndAnd);
      return single(TokenKind::Amp);
    case '=':
      if (peek(1) == '=') return pair(TokenKind::EqEq);
      return single(TokenKind::Assign);
    case '!':
      if (peek(1) == '=') return pair(TokenKind::NotEq);
      break;
    case '<':
      if (peek(1) == '<' && peek(2) == '<') {
        advance();
        return pair(TokenKind::LaunchOpen);
      }
      if (peek(1) == '=') return pair(TokenKind::LessEq);
      if (peek(1) == '<') break;
      return single(TokenKind::Less);
    case '>':
      if (peek(1) == '>' && peek(2) == '>') {
        advance();
        return pair(TokenKind::LaunchClose);
      }
      if (peek(1) == '=') return pair(TokenKind::GreaterEq);
      if (peek(1) == '>') break;
      return single(TokenKind::Greater);
    default:
      break;
    }

    std::string shown;
    if (static_cast<unsigned char>(c) >= 0x20 && static_cast<unsigned char>(c) < 0x7f)
      shown = std::string("'") + c + "'";
    else
      shown = "byte 0x" + to_hex(static_cast<unsigned char>(c));
    throw FrontendError(FrontendError::Kind::Lexical, loc, "unexpected character " + shown);
  }

  static std::string to_hex(unsigned char b) {
    const char* digits = "0123456789abcdef";
    return std::string{digits[b >> 4], digits[b & 0xf]};
  }

  Token number(SourceLocation loc, std::size_t start) {
    while (std::isdigit(static_cast<unsigned char>(peek())))
      advance();
    bool is_float = false;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      is_float = true;
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek())))
        advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t save_pos = pos_;
      int save_col = col_;
      advance();
      if (peek() == '+' || peek() == '-')
        advance();
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        is_float = true;
        while (std::isdigit(static_cast<unsigned char>(peek())))
          advance();
      } else {
        pos_ = save_pos;
        col_ = save_col;
      }
    }
    std::size_t digits_end = pos_;
    if (peek() == 'f' || peek() == 'F') {
      is_float = true;
      advance();
    }
    if (std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_')
      throw FrontendError(FrontendError::Kind::Lexical, here(),
                          std::string("unexpected character '") + peek() + "' in numeric literal");

    Token tok = make(is_float ? TokenKind::FloatLit : TokenKind::IntLit, loc, start);
    std::string_view digits = src_.substr(start, digits_end - start);
    if (is_float) {
      tok.float_value = std::stod(std::string(digits));
    } else {
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), tok.int_value);
      if (ec != std::errc{} || ptr != digits.data() + digits.size())
        throw FrontendError(FrontendError::Kind::Lexical, loc,
                            "integer literal out of range: " + std::string(digits));
    }
    return tok;
  }

  std::string_view src_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

} // namespace

std::vector<Token> tokenize(std::string_view source, const std::string& file) {
  return Lexer(source, file).run();
}

} // namespace scuba
