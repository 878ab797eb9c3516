#pragma once

#include <vector>

#include "scuba/solver.hpp"

namespace scuba::detail {

/// Interval of every node under the given variable domains (forward pass only).
std::vector<Interval> forward_intervals(const ConstraintSet& set, const std::vector<Interval>& domains);

/// True when the linear relaxation of the set over the given domains has no
/// real solution, which proves the integer problem infeasible. False means
/// feasible or undecided.
bool lp_infeasible(const ConstraintSet& set, const std::vector<Interval>& domains);

} // namespace scuba::detail
