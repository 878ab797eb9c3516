#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace scuba {

/// A position in a MiniCUDA source file. Lines and columns are 1-based.
struct SourceLocation {
  std::string file;
  int line = 1;
  int column = 1;

  auto operator<=>(const SourceLocation&) const = default;

  std::string str() const {
    return file + ":" + std::to_string(line) + ":" + std::to_string(column);
  }
};

/// Errors raised while reading the input program (lexing, parsing, name
/// resolution). The CLI maps these to exit code 2.
class FrontendError : public std::runtime_error {
public:
  enum class Kind { Lexical, Syntax, Name, Type, Io, Semantic };

  FrontendError(Kind kind, SourceLocation loc, const std::string& message)
      : std::runtime_error(loc.str() + ": " + kind_name(kind) + " error: " + message),
        kind_(kind), loc_(std::move(loc)), message_(message) {}

  Kind kind() const { return kind_; }
  const SourceLocation& location() const { return loc_; }
  const std::string& message() const { return message_; }

  static const char* kind_name(Kind kind) {
    switch (kind) {
    case Kind::Lexical: return "lexical";
    case Kind::Syntax: return "syntax";
    case Kind::Name: return "name";
    case Kind::Type: return "type";
    case Kind::Io: return "i/o";
    case Kind::Semantic: return "semantic";
    }
    return "unknown";
  }

private:
  Kind kind_;
  SourceLocation loc_;
  std::string message_;
};

/// Violations of internal invariants (a pass received input it should never
/// see). The CLI maps these to exit code 3.
class InternalError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace scuba
