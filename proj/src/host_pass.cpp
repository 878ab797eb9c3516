#include "scuba/host_pass.hpp"

namespace scuba {

HostSummary analyze_host(const IrModule& module) {
  HostSummary out;
  EtBuilder ets(module);
  // Enclosing branches: the BranchBegin and whether we are in its else arm.
  std::vector<std::pair<const IrStmt*, bool>> guards;

  auto path = [&]() {
    std::vector<EtCond> conds;
    for (const auto& [begin, in_else] : guards)
      for (const auto& c : in_else ? begin->else_conds : begin->conds)
        conds.push_back(ets.create(c));
    return conds;
  };

  for (const IrStmt& st : module.host.stmts) {
    switch (st.kind) {
    case IrKind::HostAlloc:
      out.allocs[st.result] =
          AllocationRecord{st.result, ets.create(st.operands[0]), st.loc, st.name};
      break;
    case IrKind::HostFree:
      out.frees.emplace_back(module.resolve_copy(st.operands[0]), st.loc);
      break;
    case IrKind::Assert:
      for (const auto& c : st.conds)
        out.asserts.push_back(ets.create(c));
      break;
    case IrKind::BranchBegin:
      guards.emplace_back(&st, false);
      break;
    case IrKind::BranchElse:
      guards.back().second = true;
      break;
    case IrKind::BranchEnd:
      guards.pop_back();
      break;
    case IrKind::Launch: {
      KernelLaunchRecord rec;
      rec.kernel_name = st.callee;
      rec.kernel = st.kernel;
      rec.index = static_cast<int>(out.launches.size());
      rec.location = st.loc;
      for (int a = 0; a < 3; ++a) {
        rec.dims[a] = a < static_cast<int>(st.grid.size()) ? ets.create(st.grid[a]) : et_const(1);
        rec.dims[3 + a] =
            a < static_cast<int>(st.block.size()) ? ets.create(st.block[a]) : et_const(1);
      }
      if (st.dyn_shm != kNoValue)
        rec.dyn_shm_et = ets.create(st.dyn_shm);
      const IrFunction& kern = module.kernels.at(static_cast<std::size_t>(st.kernel));
      for (std::size_t i = 0; i < st.operands.size(); ++i) {
        const ValueInfo& param = module.value(kern.params.at(i));
        LaunchArg arg;
        arg.location = st.loc;
        if (param.kind == ValueKind::Pointer) {
          arg.is_pointer = true;
          arg.pointer = module.resolve_copy(st.operands[i]);
          arg.name = module.value(st.operands[i]).name;
          auto it = out.allocs.find(arg.pointer);
          if (it != out.allocs.end()) {
            arg.alloc = it->first;
            arg.size_et = it->second.size_et;
          } else {
            out.warnings.push_back(Warning{
                st.loc, "pointer argument '" + arg.name + "' of launch of '" + st.callee +
                            "' has no known allocation; accesses through '" + param.name +
                            "' cannot be checked"});
          }
        } else if (is_integral(param.elem)) {
          arg.et = ets.create(st.operands[i]);
        }
        rec.args.push_back(std::move(arg));
      }
      rec.path_guards = path();
      out.launches.push_back(std::move(rec));
      break;
    }
    default:
      break;
    }
  }
  return out;
}

namespace {

nlohmann::json et_json(const EtPtr& et) {
  return et ? nlohmann::json(et_to_string(*et)) : nlohmann::json(nullptr);
}

} // namespace

nlohmann::json to_json(const HostSummary& s) {
  using nlohmann::json;
  json allocs = json::array();
  for (const auto& [id, rec] : s.allocs)
    allocs.push_back({{"value", id},
                      {"name", rec.name},
                      {"size", et_json(rec.size_et)},
                      {"line", rec.location.line}});
  json launches = json::array();
  for (const auto& l : s.launches) {
    json grid = json::array(), block = json::array(), args = json::array(), guards = json::array();
    for (int a = 0; a < 3; ++a) {
      grid.push_back(et_json(l.dims[a]));
      block.push_back(et_json(l.dims[3 + a]));
    }
    for (const auto& a : l.args) {
      if (a.is_pointer)
        args.push_back({{"pointer", true},
                        {"name", a.name},
                        {"alloc", a.alloc == kNoValue ? json(nullptr) : json(a.alloc)},
                        {"size", et_json(a.size_et)}});
      else
        args.push_back({{"pointer", false}, {"et", et_json(a.et)}});
    }
    for (const auto& g : l.path_guards)
      guards.push_back(et_cond_to_string(g));
    launches.push_back({{"kernel", l.kernel_name},
                        {"line", l.location.line},
                        {"grid", grid},
                        {"block", block},
                        {"dyn_shm", et_json(l.dyn_shm_et)},
                        {"args", args},
                        {"guards", guards}});
  }
  json asserts = json::array();
  for (const auto& a : s.asserts)
    asserts.push_back(et_cond_to_string(a));
  json frees = json::array();
  for (const auto& [id, loc] : s.frees)
    frees.push_back({{"value", id}, {"line", loc.line}});
  json warnings = json::array();
  for (const auto& w : s.warnings)
    warnings.push_back({{"line", w.location.line}, {"message", w.message}});
  return {{"allocs", allocs},
          {"launches", launches},
          {"asserts", asserts},
          {"frees", frees},
          {"warnings", warnings}};
}

} // namespace scuba
