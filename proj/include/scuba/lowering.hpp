#pragma once

#include "scuba/ast.hpp"
#include "scuba/ir.hpp"

namespace scuba {

/// Lowers a resolved Ast to single-assignment IR. Throws InternalError when the
/// Ast references an unresolved declaration.
IrModule lower(const Ast& ast);

} // namespace scuba
