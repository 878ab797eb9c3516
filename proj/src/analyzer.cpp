#include "scuba/analyzer.hpp"

#include <set>
#include <tuple>

#include "scuba/lowering.hpp"
#include "scuba/parser.hpp"
#include "scuba/uaf_pass.hpp"

namespace scuba {

bool AnalysisResult::has_bugs(bool strict_unverifiable) const {
  for (const auto& d : diagnostics)
    if (is_bug_kind(d.kind, strict_unverifiable))
      return true;
  return false;
}

namespace {

using Key = std::tuple<int, SourceLocation, CheckKind>;

int rank(AccessResult::Outcome o) {
  switch (o) {
  case AccessResult::Outcome::Unsat: return 0;
  case AccessResult::Outcome::Unverifiable: return 1;
  case AccessResult::Outcome::Sat: return 2;
  }
  return 0;
}

} // namespace

AnalysisResult analyze(const IrModule& module, const AnalysisOptions& options) {
  AnalysisResult result;
  result.host = analyze_host(module);
  result.warnings = result.host.warnings;
  DomainBounds bounds{options.max_domain};
  SolverOptions solver;
  solver.timeout_seconds = options.solver_timeout;
  solver.seed = options.seed;

  std::map<Key, std::size_t> slot;
  std::vector<std::optional<Diagnostic>> found;
  std::vector<Diagnostic> layout;

  for (const auto& launch : result.host.launches) {
    result.kernels.push_back(analyze_kernel(module, launch.kernel, launch));
    const KernelSummary& kern = result.kernels.back();
    if (!options.check_oob)
      continue;

    for (const auto& access : kern.mem_instrs) {
      for (CheckKind check : {CheckKind::Upper, CheckKind::Underflow}) {
        if (check == CheckKind::Underflow && !options.underflow)
          continue;
        ConstraintBuild build = build_constraints(module, access, result.host, kern, launch, check, bounds);
        Verdict verdict;
        if (build.unverifiable.empty() && !(check == CheckKind::Upper && build.size_unknown))
          verdict = solve(build.set, solver);
        std::optional<Diagnostic> d = classify(access, check, build, verdict, launch.index);

        AccessResult r;
        r.launch = launch.index;
        r.kernel = launch.kernel_name;
        r.location = access.location;
        r.check = check;
        r.target = access.target_name;
        r.space = space_name(access.space);
        r.is_partition = access.is_partition;
        if (d && d->kind == DiagnosticKind::Unverifiable)
          r.outcome = AccessResult::Outcome::Unverifiable;
        else if (d)
          r.outcome = AccessResult::Outcome::Sat;
        if (d)
          r.witness = d->witness_sites;

        Key key{launch.index, access.location, check};
        auto [it, inserted] = slot.emplace(key, result.accesses.size());
        if (inserted) {
          result.accesses.push_back(std::move(r));
          found.push_back(std::move(d));
        } else if (rank(r.outcome) > rank(result.accesses[it->second].outcome)) {
          result.accesses[it->second] = std::move(r);
          found[it->second] = std::move(d);
        }
      }
    }

    for (const auto& list : kern.partitions) {
      for (std::size_t i = 0; i + 1 < list.parts.size(); ++i) {
        ConstraintBuild build = build_layout_check(list, i, result.host, kern, launch, bounds);
        if (!build.unverifiable.empty())
          continue;
        Verdict verdict = solve(build.set, solver);
        if (verdict.kind != Verdict::Kind::Sat)
          continue;
        const PartitionRecord& cur = list.parts[i];
        const PartitionRecord& next = list.parts[i + 1];
        Diagnostic d;
        d.kind = DiagnosticKind::SuspiciousPartitionLayout;
        d.location = next.location;
        d.target = next.name;
        d.space = space_name(list.space);
        d.launch = launch.index;
        d.message = "partition '" + next.name + "' can start before partition '" + cur.name +
                    "', so the size derived for '" + cur.name + "' can be negative";
        layout.push_back(std::move(d));
      }
    }
  }
  for (auto& d : layout)
    found.push_back(std::move(d));

  std::set<std::tuple<DiagnosticKind, SourceLocation, std::string>> seen;
  for (auto& d : found)
    if (d && seen.insert(std::make_tuple(d->kind, d->location, d->target)).second)
      result.diagnostics.push_back(std::move(*d));

  if (options.check_uaf)
    for (auto& d : check_uaf(module, result.host))
      result.diagnostics.push_back(std::move(d));
  sort_diagnostics(result.diagnostics);
  return result;
}

AnalysisResult analyze_source(const std::string& source, const std::string& file,
                              const AnalysisOptions& options) {
  Ast ast = parse_source(source, file);
  IrModule module = lower(ast);
  return analyze(module, options);
}

} // namespace scuba
