#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "scuba/ast.hpp"
#include "scuba/lexer.hpp"

namespace scuba {

/// Parses a token sequence into a resolved Ast. Throws FrontendError on syntax,
/// name-resolution, type and arity errors.
Ast parse_program(const std::vector<Token>& tokens);

/// tokenize + parse_program.
Ast parse_source(std::string_view source, const std::string& file = "<input>");

/// Reads and parses a file. Missing or unreadable files raise FrontendError(Io).
Ast parse_file(const std::string& path);

} // namespace scuba
