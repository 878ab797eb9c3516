#include "scuba/uaf_pass.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <tuple>

namespace scuba {

namespace {

struct KernelUse {
  SourceLocation location;
  std::string target;
  Space space;
  int param_index;
};

class UafWalker {
public:
  UafWalker(const IrModule& module) : module_(module), stmts_(module.host.stmts) {
    match_.assign(stmts_.size(), {-1, -1});
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < stmts_.size(); ++i) {
      switch (stmts_[i].kind) {
      case IrKind::BranchBegin:
      case IrKind::LoopBegin: open.push_back(i); break;
      case IrKind::BranchElse: match_[open.back()].first = static_cast<int>(i); break;
      case IrKind::BranchEnd:
      case IrKind::LoopEnd:
        match_[open.back()].second = static_cast<int>(i);
        open.pop_back();
        break;
      default: break;
      }
    }
    for (const auto& v : stmts_)
      if (v.kind == IrKind::HostAlloc)
        allocated_.insert(v.result);
    for (const auto& k : module.kernels)
      uses_.push_back(kernel_uses(k));
  }

  std::vector<Diagnostic> run() {
    LiveSet live;
    walk(0, stmts_.size(), live, true);
    return std::move(out_);
  }

private:
  std::vector<KernelUse> kernel_uses(const IrFunction& k) {
    std::vector<KernelUse> uses;
    for (const auto& st : k.stmts) {
      if (st.kind != IrKind::MemAccess)
        continue;
      ValueId v = module_.resolve_copy(st.operands[0]);
      const ValueId target = v;
      while (const IrStmt* d = module_.def(v)) {
        if (d->kind != IrKind::SubIndex)
          break;
        v = module_.resolve_copy(d->operands[0]);
      }
      const ValueInfo& root = module_.value(v);
      if (root.def_stmt < 0 && root.param_index >= 0)
        uses.push_back(KernelUse{st.loc, module_.value(target).name, module_.value(target).space,
                                 root.param_index});
    }
    return uses;
  }

  void report(DiagnosticKind kind, const SourceLocation& loc, const std::string& target,
              Space space, std::string message, bool emit) {
    if (!emit)
      return;
    if (!seen_.insert(std::make_tuple(kind, loc, target)).second)
      return;
    Diagnostic d;
    d.kind = kind;
    d.location = loc;
    d.target = target;
    d.space = space_name(space);
    d.message = std::move(message);
    out_.push_back(std::move(d));
  }

  bool freed(const LiveSet& live, ValueId v) const {
    return allocated_.count(v) && !live.count(v);
  }

  void walk(std::size_t begin, std::size_t end, LiveSet& live, bool emit) {
    for (std::size_t i = begin; i < end; ++i) {
      const IrStmt& st = stmts_[i];
      switch (st.kind) {
      case IrKind::HostAlloc: live.insert(st.result); break;
      case IrKind::HostFree: {
        ValueId p = module_.resolve_copy(st.operands[0]);
        if (freed(live, p))
          report(DiagnosticKind::DoubleFree, st.loc, module_.value(p).name, Space::Global,
                 "'" + module_.value(p).name + "' is freed again after an earlier cudaFree", emit);
        live.erase(p);
        break;
      }
      case IrKind::MemAccess: {
        ValueId p = module_.resolve_copy(st.operands[0]);
        if (freed(live, p))
          report(DiagnosticKind::Uaf, st.loc, module_.value(p).name, Space::Global,
                 "host access to '" + module_.value(p).name + "' after cudaFree", emit);
        break;
      }
      case IrKind::Launch: launch(st, live, emit); break;
      case IrKind::BranchBegin: {
        auto [els, stop] = match_[i];
        LiveSet then_live = live, else_live = live;
        walk(i + 1, static_cast<std::size_t>(els), then_live, emit);
        walk(static_cast<std::size_t>(els) + 1, static_cast<std::size_t>(stop), else_live, emit);
        live.clear();
        std::set_intersection(then_live.begin(), then_live.end(), else_live.begin(), else_live.end(),
                              std::inserter(live, live.begin()));
        i = static_cast<std::size_t>(stop);
        break;
      }
      case IrKind::LoopBegin: {
        auto stop = static_cast<std::size_t>(match_[i].second);
        LiveSet in = live;
        for (;;) {
          LiveSet body = in;
          walk(i + 1, stop, body, false);
          LiveSet next;
          std::set_intersection(live.begin(), live.end(), body.begin(), body.end(),
                                std::inserter(next, next.begin()));
          if (next == in)
            break;
          in = std::move(next);
        }
        LiveSet body = in;
        walk(i + 1, stop, body, emit);
        live = std::move(in);
        i = stop;
        break;
      }
      default: break;
      }
    }
  }

  void launch(const IrStmt& st, const LiveSet& live, bool emit) {
    const IrFunction& kern = module_.kernels.at(static_cast<std::size_t>(st.kernel));
    for (std::size_t a = 0; a < st.operands.size(); ++a) {
      const ValueInfo& param = module_.value(kern.params.at(a));
      if (param.kind != ValueKind::Pointer)
        continue;
      ValueId p = module_.resolve_copy(st.operands[a]);
      if (!freed(live, p))
        continue;
      const std::string& name = module_.value(p).name;
      report(DiagnosticKind::Uaf, st.loc, name, Space::Global,
             "'" + name + "' is passed to kernel '" + kern.name + "' after cudaFree", emit);
      for (const auto& use : uses_[static_cast<std::size_t>(st.kernel)])
        if (use.param_index == static_cast<int>(a))
          report(DiagnosticKind::Uaf, use.location, use.target, use.space,
                 "kernel '" + kern.name + "' accesses '" + use.target + "', which refers to '" + name +
                     "' freed before the launch",
                 emit);
    }
  }

  const IrModule& module_;
  const std::vector<IrStmt>& stmts_;
  std::vector<std::pair<int, int>> match_;  // BranchBegin: (else, end); LoopBegin: (-1, end)
  std::set<ValueId> allocated_;
  std::vector<std::vector<KernelUse>> uses_;
  std::set<std::tuple<DiagnosticKind, SourceLocation, std::string>> seen_;
  std::vector<Diagnostic> out_;
};

} // namespace

std::vector<Diagnostic> check_uaf(const IrModule& module, const HostSummary&) {
  return UafWalker(module).run();
}

} // namespace scuba
