#include "scuba/report.hpp"

#include <algorithm>
#include <sstream>

namespace scuba {

namespace {

constexpr std::pair<DiagnosticKind, const char*> kKindNames[] = {
    {DiagnosticKind::OobUpper, "oob-upper"},
    {DiagnosticKind::OobUnderflow, "oob-underflow"},
    {DiagnosticKind::IntraAllocationOob, "intra-allocation-oob"},
    {DiagnosticKind::Uaf, "uaf"},
    {DiagnosticKind::DoubleFree, "double-free"},
    {DiagnosticKind::Unverifiable, "unverifiable"},
    {DiagnosticKind::SuspiciousPartitionLayout, "suspicious-partition-layout"},
};

} // namespace

const char* diagnostic_kind_name(DiagnosticKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind)
      return name;
  return "?";
}

std::optional<DiagnosticKind> parse_diagnostic_kind(const std::string& name) {
  for (const auto& [k, n] : kKindNames)
    if (name == n)
      return k;
  return std::nullopt;
}

bool is_bug_kind(DiagnosticKind kind, bool strict_unverifiable) {
  switch (kind) {
  case DiagnosticKind::Unverifiable: return strict_unverifiable;
  case DiagnosticKind::SuspiciousPartitionLayout: return false;
  default: return true;
  }
}

bool Diagnostic::operator==(const Diagnostic& o) const {
  return kind == o.kind && location == o.location && target == o.target && space == o.space &&
         witness == o.witness && message == o.message;
}

std::optional<Diagnostic> classify(const MemoryAccessRecord& access, CheckKind check,
                                   const ConstraintBuild& build, const Verdict& verdict,
                                   int launch) {
  Diagnostic d;
  d.location = access.location;
  d.target = access.target_name;
  d.space = space_name(access.space);
  d.launch = launch;

  if (!build.unverifiable.empty() || (check == CheckKind::Upper && build.size_unknown) ||
      verdict.kind == Verdict::Kind::Timeout) {
    d.kind = DiagnosticKind::Unverifiable;
    if (!build.unverifiable.empty()) {
      d.message = "cannot check access to '" + d.target + "': " + build.unverifiable;
    } else if (build.size_unknown) {
      d.message = "cannot check access to '" + d.target + "': its allocation size is unknown";
    } else {
      std::ostringstream s;
      s.precision(3);
      s << "cannot check access to '" << d.target << "': solver timed out after "
        << verdict.elapsed_seconds << "s (" << check_kind_name(check) << " check)";
      d.message = s.str();
    }
    return d;
  }
  if (verdict.kind == Verdict::Kind::Unsat)
    return std::nullopt;

  bool below_partition = check == CheckKind::Underflow && access.target != access.root;
  if (access.is_partition && (check == CheckKind::Upper || below_partition))
    d.kind = DiagnosticKind::IntraAllocationOob;
  else
    d.kind = check == CheckKind::Upper ? DiagnosticKind::OobUpper : DiagnosticKind::OobUnderflow;

  std::int64_t offset = verdict.model.at(static_cast<std::size_t>(build.offset_var));
  std::ostringstream msg;
  if (check == CheckKind::Upper) {
    std::int64_t size = verdict.model.at(static_cast<std::size_t>(build.size_var));
    msg << (d.kind == DiagnosticKind::IntraAllocationOob ? "access crosses the end of partition '"
                                                          : "access past the end of '")
        << d.target << "': offset " << offset << " with size " << size;
  } else {
    msg << (d.kind == DiagnosticKind::IntraAllocationOob ? "access before the start of partition '"
                                                          : "access before the start of '")
        << d.target << "': offset " << offset;
  }
  d.message = msg.str();

  std::map<std::string, std::int64_t> witness;
  for (const auto& [var, leaf] : build.leaves) {
    if (leaf.origin == UnknownOrigin::Param)
      continue;
    std::int64_t value = verdict.model.at(static_cast<std::size_t>(var));
    witness[leaf.display_name] = value;
    d.witness_sites.push_back(WitnessSite{leaf.display_name, value, leaf.origin, leaf.location});
  }
  d.witness = std::move(witness);
  return d;
}

void sort_diagnostics(std::vector<Diagnostic>& diagnostics) {
  std::stable_sort(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.location.file, a.location.line, a.location.column, a.kind) <
           std::tie(b.location.file, b.location.line, b.location.column, b.kind);
  });
}

nlohmann::ordered_json to_json(const Diagnostic& d) {
  nlohmann::ordered_json j;
  j["kind"] = diagnostic_kind_name(d.kind);
  j["file"] = d.location.file;
  j["line"] = d.location.line;
  j["column"] = d.location.column;
  j["target"] = d.target;
  j["space"] = d.space;
  if (d.witness) {
    nlohmann::ordered_json w = nlohmann::ordered_json::object();
    for (const auto& [k, v] : *d.witness)
      w[k] = v;
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  j["message"] = d.message;
  return j;
}

Diagnostic diagnostic_from_json(const nlohmann::json& j) {
  Diagnostic d;
  auto kind = parse_diagnostic_kind(j.at("kind").get<std::string>());
  if (!kind)
    throw std::invalid_argument("unknown diagnostic kind " + j.at("kind").dump());
  d.kind = *kind;
  d.location.file = j.at("file").get<std::string>();
  d.location.line = j.at("line").get<int>();
  d.location.column = j.at("column").get<int>();
  d.target = j.at("target").get<std::string>();
  d.space = j.at("space").get<std::string>();
  if (!j.at("witness").is_null())
    d.witness = j.at("witness").get<std::map<std::string, std::int64_t>>();
  d.message = j.at("message").get<std::string>();
  return d;
}

std::string to_json_lines(const std::vector<Diagnostic>& diagnostics) {
  std::string out;
  for (const auto& d : diagnostics)
    out += to_json(d).dump() + "\n";
  return out;
}

std::string to_text(const Diagnostic& d) {
  std::string out = d.location.str() + ": " + diagnostic_kind_name(d.kind) + ": " + d.message;
  if (d.witness && !d.witness->empty()) {
    out += " [witness:";
    for (const auto& [k, v] : *d.witness)
      out += " " + k + "=" + std::to_string(v);
    out += "]";
  }
  return out;
}

} // namespace scuba
