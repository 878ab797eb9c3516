#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scuba/ast.hpp"
#include "scuba/constraint_gen.hpp"
#include "scuba/host_pass.hpp"
#include "scuba/ir.hpp"
#include "scuba/kernel_pass.hpp"
#include "scuba/report.hpp"

namespace scuba {

struct AnalysisOptions {
  bool check_oob = true;
  bool check_uaf = true;
  bool underflow = true;
  std::int64_t max_domain = kDefaultMaxDomain;
  double solver_timeout = 30;
  std::optional<std::uint64_t> seed;
  bool strict_unverifiable = false;
};

/// Outcome of one (launch, access site, check) after merging duplicate IR
/// copies of the same site.
struct AccessResult {
  int launch = -1;
  std::string kernel;
  SourceLocation location;
  CheckKind check = CheckKind::Upper;
  std::string target;
  std::string space;
  bool is_partition = false;
  enum class Outcome { Unsat, Sat, Unverifiable } outcome = Outcome::Unsat;
  std::vector<WitnessSite> witness;
};

struct AnalysisResult {
  std::vector<Diagnostic> diagnostics;
  std::vector<AccessResult> accesses;
  HostSummary host;
  std::vector<KernelSummary> kernels;   // one per launch
  std::vector<Warning> warnings;

  bool has_bugs(bool strict_unverifiable = false) const;
};

AnalysisResult analyze(const IrModule& module, const AnalysisOptions& options = {});

/// Parses, lowers and analyzes a source text.
AnalysisResult analyze_source(const std::string& source, const std::string& file,
                              const AnalysisOptions& options = {});

} // namespace scuba
