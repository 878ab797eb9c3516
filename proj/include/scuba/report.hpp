#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scuba/constraint_gen.hpp"
#include "scuba/kernel_pass.hpp"
#include "scuba/solver.hpp"

namespace scuba {

enum class DiagnosticKind {
  OobUpper,
  OobUnderflow,
  IntraAllocationOob,
  Uaf,
  DoubleFree,
  Unverifiable,
  SuspiciousPartitionLayout,
};

const char* diagnostic_kind_name(DiagnosticKind kind);
std::optional<DiagnosticKind> parse_diagnostic_kind(const std::string& name);

/// Kinds that make the exit status 1. Unverifiable counts only when strict.
bool is_bug_kind(DiagnosticKind kind, bool strict_unverifiable = false);

/// A witness value with the site it feeds, for replay through the oracle.
struct WitnessSite {
  std::string name;
  std::int64_t value = 0;
  UnknownOrigin origin = UnknownOrigin::Input;
  SourceLocation site;
};

struct Diagnostic {
  DiagnosticKind kind = DiagnosticKind::OobUpper;
  SourceLocation location;
  std::string target;
  std::string space;
  std::optional<std::map<std::string, std::int64_t>> witness;
  std::string message;

  // Not serialized.
  int launch = -1;
  std::vector<WitnessSite> witness_sites;

  /// Compares the serialized fields.
  bool operator==(const Diagnostic& other) const;
};

/// Diagnostic for one solved access, or nothing for Unsat.
std::optional<Diagnostic> classify(const MemoryAccessRecord& access, CheckKind check,
                                   const ConstraintBuild& build, const Verdict& verdict,
                                   int launch = -1);

/// Stable sort by (file, line, column, kind).
void sort_diagnostics(std::vector<Diagnostic>& diagnostics);

nlohmann::ordered_json to_json(const Diagnostic& d);
Diagnostic diagnostic_from_json(const nlohmann::json& j);

/// One JSON object per line.
std::string to_json_lines(const std::vector<Diagnostic>& diagnostics);
/// `file:line:col: kind: message`
std::string to_text(const Diagnostic& d);

} // namespace scuba
