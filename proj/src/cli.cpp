#include "scuba/cli.hpp"

#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scuba/analyzer.hpp"
#include "scuba/lowering.hpp"
#include "scuba/oracle.hpp"
#include "scuba/parser.hpp"

namespace scuba {

namespace {

struct RunConfig {
  std::vector<std::string> inputs;
  std::string check = "all";
  std::int64_t max_domain = kDefaultMaxDomain;
  double timeout = 30;
  bool no_underflow = false;
  std::string format = "text";
  bool strict = false;
  bool dump_ir = false;
  bool dump_ets = false;
  bool dump_host = false;
  bool dump_kernel = false;
  std::string dump_constraints;

  std::string exec_input;
  std::vector<std::int64_t> exec_values;
};

void dump_ets(const KernelSummary& kern, int launch, std::ostream& out) {
  out << "; launch " << launch << " kernel " << kern.kernel_name << "\n";
  for (const auto& a : kern.mem_instrs) {
    out << a.location.str() << ": " << a.target_name << "[" << et_to_string(*a.offset_et) << "]";
    for (const auto& g : a.path_guards)
      out << " if " << et_cond_to_string(g);
    out << "\n";
  }
}

int dump_constraint_sets(const IrModule& module, const AnalysisResult& r, const RunConfig& cfg,
                         std::ostream& out, std::ostream& err) {
  DomainBounds bounds{cfg.max_domain};
  int id = 0;
  bool all = cfg.dump_constraints == "all";
  int wanted = -1;
  if (!all) {
    try {
      wanted = std::stoi(cfg.dump_constraints);
    } catch (const std::exception&) {
      err << "--dump-constraints expects an access number or 'all'\n";
      return kExitUsage;
    }
  }
  for (std::size_t l = 0; l < r.kernels.size(); ++l) {
    const KernelSummary& kern = r.kernels[l];
    const KernelLaunchRecord& launch = r.host.launches[l];
    for (const auto& a : kern.mem_instrs) {
      for (CheckKind check : {CheckKind::Upper, CheckKind::Underflow}) {
        if (check == CheckKind::Underflow && cfg.no_underflow)
          continue;
        if (all || id == wanted) {
          ConstraintBuild b = build_constraints(module, a, r.host, kern, launch, check, bounds);
          out << "; set " << id << ": launch " << l << " " << a.location.str() << " " << a.target_name
              << " " << check_kind_name(check) << "\n";
          if (!b.unverifiable.empty())
            out << "; unverifiable: " << b.unverifiable << "\n";
          else
            out << b.set.to_text();
        }
        ++id;
      }
    }
  }
  if (!all && (wanted < 0 || wanted >= id)) {
    err << "no constraint set " << cfg.dump_constraints << " (there are " << id << ")\n";
    return kExitUsage;
  }
  return kExitClean;
}

int analyze_file(const std::string& path, const RunConfig& cfg, std::ostream& out, std::ostream& err,
                 bool& bugs) {
  Ast ast = parse_file(path);
  IrModule module = lower(ast);
  if (cfg.dump_ir)
    out << print_ir(module);

  AnalysisOptions opt;
  opt.check_oob = cfg.check != "uaf";
  opt.check_uaf = cfg.check != "oob";
  opt.underflow = !cfg.no_underflow;
  opt.max_domain = cfg.max_domain;
  opt.solver_timeout = cfg.timeout;
  opt.seed = seed_from_environment();
  opt.strict_unverifiable = cfg.strict;
  AnalysisResult r = analyze(module, opt);

  if (cfg.dump_host)
    out << to_json(r.host).dump(2) << "\n";
  for (std::size_t l = 0; l < r.kernels.size(); ++l) {
    if (cfg.dump_ets)
      dump_ets(r.kernels[l], static_cast<int>(l), out);
    if (cfg.dump_kernel)
      out << to_json(r.kernels[l]).dump(2) << "\n";
  }
  if (!cfg.dump_constraints.empty())
    if (int rc = dump_constraint_sets(module, r, cfg, out, err); rc != kExitClean)
      return rc;

  if (cfg.format == "json") {
    out << to_json_lines(r.diagnostics);
  } else {
    for (const auto& w : r.warnings)
      err << w.location.str() << ": warning: " << w.message << "\n";
    for (const auto& d : r.diagnostics)
      err << to_text(d) << "\n";
  }
  bugs = bugs || r.has_bugs(cfg.strict);
  return kExitClean;
}

int run_exec(const RunConfig& cfg, std::ostream& out) {
  Ast ast = parse_file(cfg.exec_input);
  OracleOptions opt;
  opt.inputs = cfg.exec_values;
  out << trace_to_json_lines(interpret(ast, opt));
  return kExitClean;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || (args[0] != "analyze" && args[0] != "exec" && args[0] != "--help" && args[0] != "-h"))
    args.insert(args.begin(), "analyze");
  std::reverse(args.begin(), args.end());

  RunConfig cfg;
  CLI::App app{"Static out-of-bounds and use-after-free checker for MiniCUDA", "scuba-mini"};
  app.require_subcommand(1);

  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Analyze MiniCUDA programs");
  analyze_cmd->add_option("files", cfg.inputs, "Input .mcu files")->required();
  analyze_cmd->add_option("--check", cfg.check, "Checks to run")
      ->check(CLI::IsMember({"oob", "uaf", "all"}));
  analyze_cmd->add_option("--max-domain", cfg.max_domain, "Bound M for unknown inputs")
      ->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 40));
  analyze_cmd->add_option("--solver-timeout", cfg.timeout, "Seconds per constraint set")
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_flag("--no-underflow", cfg.no_underflow, "Skip negative-offset checks");
  analyze_cmd->add_option("--format", cfg.format, "Diagnostic format")
      ->check(CLI::IsMember({"text", "json"}));
  analyze_cmd->add_flag("--strict-unverifiable", cfg.strict, "Treat unverifiable accesses as bugs");
  analyze_cmd->add_flag("--dump-ir", cfg.dump_ir, "Print the IR");
  analyze_cmd->add_flag("--dump-ets", cfg.dump_ets, "Print access offset trees");
  analyze_cmd->add_flag("--dump-host-summary", cfg.dump_host, "Print the host summary as JSON");
  analyze_cmd->add_flag("--dump-kernel-summary", cfg.dump_kernel, "Print kernel summaries as JSON");
  analyze_cmd->add_option("--dump-constraints", cfg.dump_constraints, "Print constraint set N or all");

  CLI::App* exec_cmd = app.add_subcommand("exec", "Run a program in the interpreter");
  exec_cmd->add_option("file", cfg.exec_input, "Input .mcu file")->required();
  exec_cmd->add_option("--inputs", cfg.exec_values, "Values for __input() in order")->delimiter(',');

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitClean;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitClean;
  } catch (const CLI::ParseError& e) {
    err << "scuba-mini: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (exec_cmd->parsed())
      return run_exec(cfg, out);
    bool bugs = false;
    for (const auto& path : cfg.inputs)
      if (int rc = analyze_file(path, cfg, out, err, bugs); rc != kExitClean)
        return rc;
    return bugs ? kExitBugs : kExitClean;
  } catch (const FrontendError& e) {
    err << e.what() << "\n";
    return kExitFrontend;
  } catch (const UnsupportedStatementError& e) {
    err << e.location().str() << ": unsupported: " << e.what() << "\n";
    return kExitInternal;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

} // namespace scuba
