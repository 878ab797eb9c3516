#pragma once

#include <set>
#include <vector>

#include "scuba/host_pass.hpp"
#include "scuba/ir.hpp"
#include "scuba/report.hpp"

namespace scuba {

using LiveSet = std::set<ValueId>;

/// Use-after-free and double-free findings over the host walk. Branch arms
/// join by intersection; loops iterate to a fixpoint before reporting.
std::vector<Diagnostic> check_uaf(const IrModule& module, const HostSummary& host);

} // namespace scuba
