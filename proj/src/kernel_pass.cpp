#include "scuba/kernel_pass.hpp"

namespace scuba {

const char* space_name(Space space) {
  switch (space) {
  case Space::Host: return "host";
  case Space::Global: return "global";
  case Space::SharedStatic: return "shared-static";
  case Space::SharedDynamic: return "shared-dynamic-partition";
  case Space::Local: return "local";
  }
  return "?";
}

std::vector<EtPtr> derive_partition_sizes(const std::vector<PartitionRecord>& partitions,
                                          const EtPtr& total) {
  std::vector<EtPtr> sizes;
  for (std::size_t i = 0; i + 1 < partitions.size(); ++i)
    sizes.push_back(et_binop(BinaryOp::Sub, partitions[i + 1].offset_et, partitions[i].offset_et));
  if (!partitions.empty())
    sizes.push_back(total ? et_binop(BinaryOp::Sub, total, partitions.back().offset_et) : nullptr);
  return sizes;
}

KernelSummary analyze_kernel(const IrModule& module, int kernel, const KernelLaunchRecord& launch) {
  const IrFunction& fn = module.kernels.at(static_cast<std::size_t>(kernel));
  KernelSummary out;
  out.kernel_name = fn.name;
  out.kernel = kernel;

  std::map<ValueId, EtPtr> bindings;
  for (std::size_t i = 0; i < fn.params.size() && i < launch.args.size(); ++i)
    if (launch.args[i].et)
      bindings[fn.params[i]] = launch.args[i].et;
  EtBuilder ets(module, std::move(bindings));

  // Partition bookkeeping: value -> (list index, offset from the list's base).
  std::map<ValueId, std::pair<std::size_t, EtPtr>> part_of;
  std::vector<std::pair<const IrStmt*, bool>> guards;
  std::map<ValueId, EtPtr> static_sizes;

  auto ensure_list = [&](ValueId base) -> std::size_t {
    if (auto it = part_of.find(base); it != part_of.end())
      return it->second.first;
    PartitionList list;
    list.base = base;
    list.space = module.value(base).space;
    list.parts.push_back(PartitionRecord{base, et_const(0), module.value(base).loc,
                                         module.value(base).name});
    out.partitions.push_back(std::move(list));
    std::size_t index = out.partitions.size() - 1;
    part_of[base] = {index, et_const(0)};
    return index;
  };

  for (const IrStmt& st : fn.stmts) {
    switch (st.kind) {
    case IrKind::StaticAlloca: {
      EtPtr size = ets.create(st.operands[0]);
      out.k_allocs[st.result] = size;
      static_sizes[st.result] = size;
      break;
    }
    case IrKind::DynShmAlloca:
      ensure_list(st.result);
      break;
    case IrKind::SubIndex: {
      ValueId base = module.resolve_copy(st.operands[0]);
      std::size_t list = ensure_list(base);
      EtPtr rel = ets.create(st.operands[1]);
      const EtPtr& parent = part_of[base].second;
      EtPtr offset = (parent->kind == EtKind::Const && parent->value == 0)
                         ? rel
                         : et_binop(BinaryOp::Add, parent, rel);
      out.partitions[list].parts.push_back(PartitionRecord{st.result, offset, st.loc, st.name});
      part_of[st.result] = {list, offset};
      break;
    }
    case IrKind::MemAccess: {
      MemoryAccessRecord rec;
      rec.target = module.resolve_copy(st.operands[0]);
      rec.offset_et = ets.create(st.operands[1]);
      rec.access_kind = st.access;
      rec.atomic = st.atomic;
      rec.location = st.loc;
      for (const auto& [begin, in_else] : guards)
        for (const auto& c : in_else ? begin->else_conds : begin->conds)
          rec.path_guards.push_back(ets.create(c));
      rec.target_name = module.value(rec.target).name;
      rec.space = module.value(rec.target).space;
      rec.root = rec.target;
      out.mem_instrs.push_back(std::move(rec));
      break;
    }
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
    default:
      break;
    }
  }

  for (auto& list : out.partitions) {
    const ValueInfo& base = module.value(list.base);
    if (auto it = static_sizes.find(list.base); it != static_sizes.end()) {
      list.total_size = it->second;
    } else if (base.space == Space::SharedDynamic) {
      if (!launch.dyn_shm_et)
        throw FrontendError(FrontendError::Kind::Semantic, launch.location,
                            "kernel '" + fn.name + "' declares extern shared memory '" + base.name +
                                "' but the launch passes no dynamic shared memory size");
      list.total_size = launch.dyn_shm_et;
    } else if (base.param_index >= 0 &&
               static_cast<std::size_t>(base.param_index) < launch.args.size()) {
      list.total_size = launch.args[static_cast<std::size_t>(base.param_index)].size_et;
    }
    std::vector<EtPtr> sizes = derive_partition_sizes(list.parts, list.total_size);
    for (std::size_t i = 0; i < list.parts.size(); ++i) {
      if (sizes[i])
        out.k_allocs[list.parts[i].part_value] = sizes[i];
      else
        out.k_allocs.erase(list.parts[i].part_value);
    }
  }

  for (auto& rec : out.mem_instrs) {
    auto it = part_of.find(rec.target);
    if (it == part_of.end())
      continue;
    const PartitionList& list = out.partitions[it->second.first];
    rec.is_partition = list.parts.size() > 1;
    rec.root = list.base;
    if (list.space == Space::SharedDynamic)
      rec.space = Space::SharedDynamic;
  }
  return out;
}

EtPtr target_size(const IrModule& module, const KernelSummary& kern,
                  const KernelLaunchRecord& launch, ValueId target) {
  if (auto it = kern.k_allocs.find(target); it != kern.k_allocs.end())
    return it->second;
  for (const auto& list : kern.partitions)
    for (const auto& p : list.parts)
      if (p.part_value == target)
        return nullptr;
  const ValueInfo& v = module.value(target);
  if (v.def_stmt < 0 && v.param_index >= 0 &&
      static_cast<std::size_t>(v.param_index) < launch.args.size())
    return launch.args[static_cast<std::size_t>(v.param_index)].size_et;
  return nullptr;
}

nlohmann::json to_json(const KernelSummary& s) {
  using nlohmann::json;
  json allocs = json::array();
  for (const auto& [id, et] : s.k_allocs)
    allocs.push_back({{"value", id}, {"size", et ? json(et_to_string(*et)) : json(nullptr)}});
  json parts = json::array();
  for (const auto& list : s.partitions) {
    json entries = json::array();
    for (const auto& p : list.parts)
      entries.push_back({{"value", p.part_value},
                         {"name", p.name},
                         {"offset", et_to_string(*p.offset_et)},
                         {"line", p.location.line}});
    parts.push_back({{"base", list.base},
                     {"space", space_name(list.space)},
                     {"total", list.total_size ? json(et_to_string(*list.total_size)) : json(nullptr)},
                     {"partitions", entries}});
  }
  json accesses = json::array();
  for (const auto& m : s.mem_instrs) {
    json guards = json::array();
    for (const auto& g : m.path_guards)
      guards.push_back(et_cond_to_string(g));
    accesses.push_back({{"target", m.target},
                        {"name", m.target_name},
                        {"space", space_name(m.space)},
                        {"partition", m.is_partition},
                        {"offset", et_to_string(*m.offset_et)},
                        {"kind", access_kind_name(m.access_kind)},
                        {"guards", guards},
                        {"line", m.location.line},
                        {"column", m.location.column}});
  }
  json asserts = json::array();
  for (const auto& a : s.asserts)
    asserts.push_back(et_cond_to_string(a));
  return {{"kernel", s.kernel_name},
          {"k_allocs", allocs},
          {"partitions", parts},
          {"mem_instrs", accesses},
          {"asserts", asserts}};
}

} // namespace scuba
