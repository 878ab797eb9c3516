#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scuba/host_pass.hpp"
#include "scuba/kernel_pass.hpp"
#include "scuba/solver.hpp"

namespace scuba {

enum class CheckKind { Upper, Underflow };
const char* check_kind_name(CheckKind kind);

inline constexpr std::int64_t kDefaultMaxDomain = std::int64_t{1} << 20;

struct DomainBounds {
  /// M: bound for Unknown leaves (inputs, loads, unbound parameters).
  std::int64_t max_domain = kDefaultMaxDomain;
  /// Bound for builtins, loop variables, offsets and sizes.
  std::int64_t derived_bound() const;
};

/// Origin of a solver variable that stands for an Unknown leaf.
struct LeafInfo {
  std::string display_name;   // program-level name, or a site-qualified fallback
  std::string source_name;    // empty when the value was never named
  UnknownOrigin origin = UnknownOrigin::Input;
  ValueId tag = kNoValue;
  SourceLocation location;    // the defining site (the __input() or load expression)
};

struct ConstraintBuild {
  ConstraintSet set;
  bool size_unknown = false;      // upper check on a target without a size tree
  std::string unverifiable;       // non-empty when the set could not be built
  std::map<int, LeafInfo> leaves; // solver variable index -> Unknown leaf
  int offset_var = -1;
  int size_var = -1;
};

/// Maps canonical trees to solver expressions, creating one variable per
/// distinct leaf and the side constraints of loop variables.
class EtEncoder {
public:
  EtEncoder(ConstraintBuild& out, const DomainBounds& bounds) : out_(out), bounds_(bounds) {}

  NodeId encode(const EtPtr& et);
  /// Adds `lhs rel rhs` of a condition after canonicalizing it.
  void add_condition(const EtCond& cond, int kind, const std::string& origin);
  /// Canonicalizes with the derived bound; throws EtOverflowError.
  EtPtr canonical(const EtPtr& et) const;
  int builtin_var(BuiltinKind kind);

private:
  std::string fresh_name(const std::string& base, ValueId tag);
  void flush_loops();

  ConstraintBuild& out_;
  const DomainBounds& bounds_;
  std::map<std::pair<int, ValueId>, int> leaf_vars_;  // (leaf kind, tag) -> variable
  std::map<int, int> builtin_vars_;
  std::vector<EtPtr> pending_loops_;
  bool flushing_ = false;
};

/// One constraint set for one access and one check kind.
ConstraintBuild build_constraints(const IrModule& module, const MemoryAccessRecord& access,
                                  const HostSummary& host, const KernelSummary& kern,
                                  const KernelLaunchRecord& launch, CheckKind check,
                                  const DomainBounds& bounds = {});

/// Satisfiable iff partition `index + 1` of `list` can start before
/// partition `index` under the launch's context.
ConstraintBuild build_layout_check(const PartitionList& list, std::size_t index,
                                   const HostSummary& host, const KernelSummary& kern,
                                   const KernelLaunchRecord& launch, const DomainBounds& bounds = {});

/// "sol" followed by the name with its first letter upper-cased.
std::string solver_var_name(const std::string& name);

} // namespace scuba
