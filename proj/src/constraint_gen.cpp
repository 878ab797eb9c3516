#include "scuba/constraint_gen.hpp"

#include <algorithm>
#include <cctype>

namespace scuba {

const char* check_kind_name(CheckKind kind) {
  return kind == CheckKind::Upper ? "upper" : "underflow";
}

std::int64_t DomainBounds::derived_bound() const {
  return std::max<std::int64_t>(max_domain, (std::int64_t{1} << 31) - 1);
}

std::string solver_var_name(const std::string& name) {
  std::string clean;
  for (char c : name)
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
      clean += c;
  if (clean.empty())
    clean = "V";
  clean[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(clean[0])));
  return "sol" + clean;
}

EtPtr EtEncoder::canonical(const EtPtr& et) const { return canonicalize(et, bounds_.derived_bound()); }

int EtEncoder::builtin_var(BuiltinKind kind) {
  int key = static_cast<int>(kind);
  if (auto it = builtin_vars_.find(key); it != builtin_vars_.end())
    return it->second;
  int v = out_.set.add_var(std::string("sol") + builtin_short_name(kind),
                           Interval{0, bounds_.derived_bound()});
  builtin_vars_[key] = v;
  return v;
}

std::string EtEncoder::fresh_name(const std::string& base, ValueId tag) {
  std::string name = solver_var_name(base);
  if (out_.set.find_var(name))
    name += "_" + std::to_string(tag);
  return name;
}

NodeId EtEncoder::encode(const EtPtr& et) {
  NodeId out = -1;
  switch (et->kind) {
  case EtKind::Const: out = out_.set.constant(et->value); break;
  case EtKind::Builtin: out = out_.set.var(builtin_var(et->builtin)); break;
  case EtKind::Unknown: {
    auto key = std::make_pair(0, et->tag);
    auto it = leaf_vars_.find(key);
    if (it == leaf_vars_.end()) {
      std::string base = et->name.empty() ? "v" + std::to_string(et->tag) : et->name;
      int v = out_.set.add_var(fresh_name(base, et->tag), Interval{0, bounds_.max_domain});
      LeafInfo info;
      info.source_name = et->name;
      info.origin = et->origin;
      info.tag = et->tag;
      info.location = et->loc;
      out_.leaves[v] = info;
      it = leaf_vars_.emplace(key, v).first;
    }
    out = out_.set.var(it->second);
    break;
  }
  case EtKind::LoopVar: {
    auto key = std::make_pair(1, et->tag);
    auto it = leaf_vars_.find(key);
    if (it == leaf_vars_.end()) {
      std::int64_t v_bound = bounds_.derived_bound();
      int v = out_.set.add_var(fresh_name(et->name.empty() ? "i" : et->name, et->tag),
                               Interval{-v_bound, v_bound});
      it = leaf_vars_.emplace(key, v).first;
      pending_loops_.push_back(et);
    }
    out = out_.set.var(it->second);
    break;
  }
  case EtKind::BinOp: {
    NodeId l = encode(et->lhs);
    NodeId r = encode(et->rhs);
    out = out_.set.binop(et->op, l, r);
    break;
  }
  }
  if (!flushing_)
    flush_loops();
  return out;
}

void EtEncoder::flush_loops() {
  flushing_ = true;
  while (!pending_loops_.empty()) {
    EtPtr loop = pending_loops_.back();
    pending_loops_.pop_back();
    NodeId v = out_.set.var(leaf_vars_.at({1, loop->tag}));
    NodeId lo = encode(loop->lhs);
    NodeId hi = encode(loop->rhs);
    out_.set.add(RelOp::Le, lo, v, 3, "loop lower bound of " + et_leaf_name(*loop));
    out_.set.add(RelOp::Lt, v, hi, 3, "loop upper bound of " + et_leaf_name(*loop));
  }
  flushing_ = false;
}

void EtEncoder::add_condition(const EtCond& cond, int kind, const std::string& origin) {
  EtPtr l = canonical(cond.lhs);
  EtPtr r = canonical(cond.rhs);
  NodeId a = encode(l);
  NodeId b = encode(r);
  out_.set.add(cond.op, a, b, kind, origin);
}

namespace {

void add_context(EtEncoder& enc, ConstraintBuild& out, const HostSummary& host,
                 const KernelSummary& kern, const KernelLaunchRecord& launch) {
  for (int k = 0; k < kBuiltinCount; ++k)
    enc.builtin_var(static_cast<BuiltinKind>(k));
  static constexpr BuiltinKind tids[] = {BuiltinKind::TidX, BuiltinKind::TidY, BuiltinKind::TidZ};
  static constexpr BuiltinKind bids[] = {BuiltinKind::BidX, BuiltinKind::BidY, BuiltinKind::BidZ};
  static constexpr BuiltinKind bdims[] = {BuiltinKind::BDimX, BuiltinKind::BDimY, BuiltinKind::BDimZ};
  static constexpr BuiltinKind gdims[] = {BuiltinKind::GDimX, BuiltinKind::GDimY, BuiltinKind::GDimZ};
  auto& set = out.set;
  for (int a = 0; a < 3; ++a) {
    set.add(RelOp::Lt, set.var(enc.builtin_var(tids[a])), set.var(enc.builtin_var(bdims[a])), 1,
            std::string(builtin_source_name(tids[a])) + " < " + builtin_source_name(bdims[a]));
    set.add(RelOp::Lt, set.var(enc.builtin_var(bids[a])), set.var(enc.builtin_var(gdims[a])), 1,
            std::string(builtin_source_name(bids[a])) + " < " + builtin_source_name(gdims[a]));
  }
  for (int a = 0; a < 3; ++a) {
    set.add(RelOp::Eq, set.var(enc.builtin_var(gdims[a])), enc.encode(enc.canonical(launch.dims[a])), 3,
            "launch grid dimension");
    set.add(RelOp::Eq, set.var(enc.builtin_var(bdims[a])),
            enc.encode(enc.canonical(launch.dims[3 + a])), 3, "launch block dimension");
  }
  for (const auto& c : host.asserts)
    enc.add_condition(c, 3, "host assert");
  for (const auto& c : kern.asserts)
    enc.add_condition(c, 3, "kernel assert");
  for (const auto& c : launch.path_guards)
    enc.add_condition(c, 3, "launch path guard");
}

void finalize_leaves(ConstraintBuild& out, const IrModule* module) {
  std::map<std::string, int> uses;
  for (const auto& [v, info] : out.leaves)
    if (!info.source_name.empty())
      ++uses[info.source_name];
  for (auto& [v, info] : out.leaves) {
    std::string at = "@" + std::to_string(info.location.line) + ":" + std::to_string(info.location.column);
    if (info.source_name.empty()) {
      std::string array = "load";
      if (module && info.origin == UnknownOrigin::Load) {
        if (const IrStmt* st = module->def(info.tag); st && !st->operands.empty())
          array = module->value(st->operands[0]).name + "[]";
      }
      info.display_name = array + at;
    } else if (uses[info.source_name] > 1) {
      info.display_name = info.source_name + at;
    } else {
      info.display_name = info.source_name;
    }
  }
}

} // namespace

ConstraintBuild build_constraints(const IrModule& module, const MemoryAccessRecord& access,
                                  const HostSummary& host, const KernelSummary& kern,
                                  const KernelLaunchRecord& launch, CheckKind check,
                                  const DomainBounds& bounds) {
  ConstraintBuild out;
  EtEncoder enc(out, bounds);
  std::int64_t v_bound = bounds.derived_bound();
  try {
    add_context(enc, out, host, kern, launch);
    auto& set = out.set;
    out.offset_var = set.add_var("solOffset", check == CheckKind::Upper ? Interval{0, v_bound}
                                                                        : Interval{-v_bound, v_bound});
    set.add(RelOp::Eq, set.var(out.offset_var), enc.encode(enc.canonical(access.offset_et)), 3,
            "access offset");
    for (const auto& g : access.path_guards)
      enc.add_condition(g, 3, "path guard");
    if (check == CheckKind::Upper) {
      EtPtr size = target_size(module, kern, launch, access.target);
      if (!size) {
        out.size_unknown = true;
      } else {
        out.size_var = set.add_var("solSize", Interval{-v_bound, v_bound});
        set.add(RelOp::Eq, set.var(out.size_var), enc.encode(enc.canonical(size)), 3, "target size");
        set.add(RelOp::Ge, set.var(out.offset_var), set.var(out.size_var), 2, "offset >= size");
      }
    } else {
      set.add(RelOp::Lt, set.var(out.offset_var), set.constant(0), 2, "offset < 0");
    }
  } catch (const EtOverflowError& e) {
    out.unverifiable = e.what();
  }
  finalize_leaves(out, &module);
  return out;
}

ConstraintBuild build_layout_check(const PartitionList& list, std::size_t index,
                                   const HostSummary& host, const KernelSummary& kern,
                                   const KernelLaunchRecord& launch, const DomainBounds& bounds) {
  ConstraintBuild out;
  EtEncoder enc(out, bounds);
  try {
    add_context(enc, out, host, kern, launch);
    NodeId cur = enc.encode(enc.canonical(list.parts.at(index).offset_et));
    NodeId next = enc.encode(enc.canonical(list.parts.at(index + 1).offset_et));
    out.set.add(RelOp::Lt, next, cur, 2, "partition offsets invert");
  } catch (const EtOverflowError& e) {
    out.unverifiable = e.what();
  }
  finalize_leaves(out, nullptr);
  return out;
}

} // namespace scuba
