#include "scuba/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace scuba {

namespace {

constexpr std::int64_t kDenseLimit = 1 << 20;
constexpr std::int64_t kMaxThreadsPerLaunch = std::int64_t{1} << 27;

struct Ptr {
  int alloc = -1;
  std::int64_t offset = 0;
  int part = 0;
  bool opaque = false;
};

struct Value {
  enum class K : std::uint8_t { Int, Float, Ptr };
  K k = K::Int;
  std::int64_t i = 0;
  double f = 0;
  Ptr p;

  static Value integer(std::int64_t v) { return Value{K::Int, v, 0, {}}; }
  static Value real(double v) { return Value{K::Float, 0, v, {}}; }
  static Value pointer(Ptr v) { return Value{K::Ptr, 0, 0, v}; }
  bool is_float() const { return k == K::Float; }
  double as_double() const { return k == K::Float ? f : static_cast<double>(i); }
};

struct Alloc {
  std::string name;
  Space space = Space::Global;
  std::int64_t size = 0;
  bool is_float = false;
  bool freed = false;
  bool from_malloc = false;
  bool dense = true;
  std::vector<std::int64_t> ints;
  std::vector<double> reals;
  std::unordered_map<std::int64_t, std::int64_t> sparse_ints;
  std::unordered_map<std::int64_t, double> sparse_reals;

  void reset(std::string n, Space s, std::int64_t sz, bool flt) {
    name = std::move(n);
    space = s;
    size = sz;
    is_float = flt;
    freed = false;
    from_malloc = false;
    dense = sz <= kDenseLimit;
    ints.clear();
    reals.clear();
    sparse_ints.clear();
    sparse_reals.clear();
    if (dense) {
      if (flt)
        reals.assign(static_cast<std::size_t>(std::max<std::int64_t>(sz, 0)), 0.0);
      else
        ints.assign(static_cast<std::size_t>(std::max<std::int64_t>(sz, 0)), 0);
    }
  }

  Value read(std::int64_t idx) const {
    if (idx < 0 || idx >= size)
      return is_float ? Value::real(0) : Value::integer(0);
    if (dense)
      return is_float ? Value::real(reals[static_cast<std::size_t>(idx)])
                      : Value::integer(ints[static_cast<std::size_t>(idx)]);
    if (is_float) {
      auto it = sparse_reals.find(idx);
      return Value::real(it == sparse_reals.end() ? 0.0 : it->second);
    }
    auto it = sparse_ints.find(idx);
    return Value::integer(it == sparse_ints.end() ? 0 : it->second);
  }

  void write(std::int64_t idx, const Value& v) {
    if (idx < 0 || idx >= size)
      return;
    if (is_float) {
      double d = v.as_double();
      if (dense) reals[static_cast<std::size_t>(idx)] = d;
      else sparse_reals[idx] = d;
    } else {
      std::int64_t x = v.is_float() ? static_cast<std::int64_t>(v.f) : v.i;
      if (dense) ints[static_cast<std::size_t>(idx)] = x;
      else sparse_ints[idx] = x;
    }
  }
};

struct RuntimeFault {
  SourceLocation loc;
  std::string message;
};

struct AssertFailure {
  SourceLocation loc;
};

struct StepLimit {};

enum class Flow { Normal, Return };

struct PendingAccess {
  const Expr* site;
  int alloc;
  int part;
  std::int64_t start;
  std::int64_t index;
  AccessKind kind;
};

class Interpreter {
public:
  Interpreter(const Ast& ast, const OracleOptions& options)
      : ast_(ast), opt_(options), slots_(ast.decls.size()) {}

  ExecutionTrace run() {
    try {
      exec_list(ast_.host_main);
    } catch (const AssertFailure&) {
      trace_.host_assert_failed = true;
    } catch (const RuntimeFault& f) {
      trace_.errors.push_back(RuntimeEvent{f.loc, f.message, -1});
      trace_.aborted = true;
    } catch (const StepLimit&) {
      trace_.errors.push_back(RuntimeEvent{ast_.main_loc, "step limit exceeded", launch_});
      trace_.aborted = true;
    }
    return std::move(trace_);
  }

private:
  // ---- allocation ----
  int new_alloc(const std::string& name, Space space, std::int64_t size, bool flt,
                std::vector<int>* scope) {
    int id;
    if (scope && !free_ids_.empty()) {
      id = free_ids_.back();
      free_ids_.pop_back();
    } else {
      id = static_cast<int>(allocs_.size());
      allocs_.emplace_back();
    }
    allocs_[static_cast<std::size_t>(id)].reset(name, space, size, flt);
    if (scope)
      scope->push_back(id);
    return id;
  }

  void release(std::vector<int>& scope) {
    for (int id : scope) {
      Alloc& a = allocs_[static_cast<std::size_t>(id)];
      a.ints = {};
      a.reals = {};
      a.sparse_ints.clear();
      a.sparse_reals.clear();
      free_ids_.push_back(id);
    }
    scope.clear();
  }

  // ---- helpers ----
  void step() {
    if (++steps_ > opt_.step_limit)
      throw StepLimit{};
  }

  [[noreturn]] void fault(const SourceLocation& loc, const std::string& msg) {
    throw RuntimeFault{loc, msg};
  }

  std::int64_t as_int(const Value& v, const SourceLocation& loc) {
    if (v.k == Value::K::Int)
      return v.i;
    if (v.k == Value::K::Float)
      return static_cast<std::int64_t>(v.f);
    fault(loc, "pointer used as an integer");
  }

  std::int64_t next_input(const Expr& e) {
    std::int64_t v;
    if (auto it = opt_.input_sites.find(e.loc); it != opt_.input_sites.end())
      v = it->second;
    else if (input_pos_ < opt_.inputs.size())
      v = opt_.inputs[input_pos_++];
    else if (opt_.default_input)
      v = *opt_.default_input;
    else
      fault(e.loc, "no value supplied for __input() #" + std::to_string(trace_.inputs_used.size() + 1));
    trace_.inputs_used.push_back(v);
    return v;
  }

  std::int64_t builtin(BuiltinKind k) const {
    int i = static_cast<int>(k);
    const std::array<std::int64_t, 3>* src[] = {&tid_, &bid_, &bdim_, &gdim_};
    return (*src[i / 3])[static_cast<std::size_t>(i % 3)];
  }

  // ---- expressions ----
  Value eval(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::IntLit: return Value::integer(e.int_value);
    case Expr::Kind::FloatLit: return Value::real(e.float_value);
    case Expr::Kind::Var: return slots_[static_cast<std::size_t>(e.decl)];
    case Expr::Kind::Builtin:
      if (!in_kernel_)
        fault(e.loc, "builtin outside a kernel");
      return Value::integer(builtin(e.builtin));
    case Expr::Kind::Input: return Value::integer(next_input(e));
    case Expr::Kind::Neg: {
      Value v = eval(*e.args[0]);
      if (v.is_float())
        return Value::real(-v.f);
      std::int64_t x = as_int(v, e.loc);
      if (x == INT64_MIN)
        fault(e.loc, "integer overflow");
      return Value::integer(-x);
    }
    case Expr::Kind::Binary: return binary(e, eval(*e.args[0]), eval(*e.args[1]));
    case Expr::Kind::Index: {
      auto [alloc, idx] = access(e, AccessKind::Read);
      if (auto it = opt_.load_overrides.find(e.loc); it != opt_.load_overrides.end())
        return Value::integer(it->second);
      if (alloc < 0)
        return Value::integer(0);
      return allocs_[static_cast<std::size_t>(alloc)].read(idx);
    }
    case Expr::Kind::Atomic: {
      const Expr& target = *e.args[0];
      auto [alloc, idx] = access(target, AccessKind::ReadWrite);
      Value operand = eval(*e.args[1]);
      if (alloc < 0)
        return Value::integer(0);
      Alloc& a = allocs_[static_cast<std::size_t>(alloc)];
      Value old = a.read(idx);
      Value updated = old;
      switch (e.atomic) {
      case AtomicOp::Add: updated = binary_values(BinaryOp::Add, old, operand, e.loc); break;
      case AtomicOp::Min:
        if (operand.as_double() < old.as_double()) updated = operand;
        break;
      case AtomicOp::Max:
        if (operand.as_double() > old.as_double()) updated = operand;
        break;
      }
      a.write(idx, updated);
      return old;
    }
    }
    fault(e.loc, "unknown expression");
  }

  Value binary(const Expr& e, const Value& a, const Value& b) { return binary_values(e.op, a, b, e.loc); }

  Value binary_values(BinaryOp op, const Value& a, const Value& b, const SourceLocation& loc) {
    if (a.is_float() || b.is_float()) {
      double x = a.as_double(), y = b.as_double();
      switch (op) {
      case BinaryOp::Add: return Value::real(x + y);
      case BinaryOp::Sub: return Value::real(x - y);
      case BinaryOp::Mul: return Value::real(x * y);
      case BinaryOp::Div: return Value::real(x / y);
      case BinaryOp::Mod: return Value::real(std::fmod(x, y));
      }
    }
    std::int64_t x = as_int(a, loc), y = as_int(b, loc), r = 0;
    bool overflow = false;
    switch (op) {
    case BinaryOp::Add: overflow = __builtin_add_overflow(x, y, &r); break;
    case BinaryOp::Sub: overflow = __builtin_sub_overflow(x, y, &r); break;
    case BinaryOp::Mul: overflow = __builtin_mul_overflow(x, y, &r); break;
    case BinaryOp::Div:
    case BinaryOp::Mod:
      if (y < 1)
        fault(loc, "division by " + std::to_string(y));
      r = op == BinaryOp::Div ? x / y : x % y;
      break;
    }
    if (overflow)
      fault(loc, "integer overflow");
    return Value::integer(r);
  }

  bool condition(const Condition& c) {
    for (const auto& cmp : c) {
      Value l = eval(*cmp.lhs), r = eval(*cmp.rhs);
      bool ok;
      if (l.is_float() || r.is_float()) {
        double x = l.as_double(), y = r.as_double();
        switch (cmp.op) {
        case RelOp::Lt: ok = x < y; break;
        case RelOp::Le: ok = x <= y; break;
        case RelOp::Gt: ok = x > y; break;
        case RelOp::Ge: ok = x >= y; break;
        case RelOp::Eq: ok = x == y; break;
        default: ok = x != y; break;
        }
      } else {
        std::int64_t x = as_int(l, cmp.loc), y = as_int(r, cmp.loc);
        switch (cmp.op) {
        case RelOp::Lt: ok = x < y; break;
        case RelOp::Le: ok = x <= y; break;
        case RelOp::Gt: ok = x > y; break;
        case RelOp::Ge: ok = x >= y; break;
        case RelOp::Eq: ok = x == y; break;
        default: ok = x != y; break;
        }
      }
      if (!ok)
        return false;
    }
    return true;
  }

  // Linear offset of an Index expression, row-major over declared extents.
  std::int64_t linear_index(const Expr& index) {
    std::int64_t off = as_int(eval(*index.args[0]), index.loc);
    if (index.args.size() == 1)
      return off;
    const std::vector<std::int64_t>& dims = extents_.at(index.decl);
    for (std::size_t k = 1; k < index.args.size(); ++k) {
      std::int64_t sub = as_int(eval(*index.args[k]), index.loc);
      if (__builtin_mul_overflow(off, dims[k], &off) || __builtin_add_overflow(off, sub, &off))
        fault(index.loc, "integer overflow");
    }
    return off;
  }

  // Evaluates the subscripts, records the access and returns (allocation, cell).
  std::pair<int, std::int64_t> access(const Expr& index, AccessKind kind) {
    std::int64_t k = linear_index(index);
    const Value& base = slots_[static_cast<std::size_t>(index.decl)];
    if (base.k != Value::K::Ptr)
      fault(index.loc, "subscript of a non-pointer");
    const Ptr& p = base.p;
    if (p.opaque)
      fault(index.loc, "access through an uninitialized pointer '" + index.text + "'");
    Alloc& a = allocs_[static_cast<std::size_t>(p.alloc)];
    if (a.freed)
      temporal("uaf", index.loc, a.name);
    PendingAccess acc{&index, p.alloc, p.part, p.offset, k, kind};
    if (in_kernel_)
      pending_.push_back(std::move(acc));
    else
      commit(acc, true);
    ++trace_.access_count;
    std::int64_t cell = p.offset + k;
    return {p.alloc, (cell >= 0 && cell < a.size) ? cell : -1};
  }

  void temporal(const std::string& kind, const SourceLocation& loc, const std::string& target) {
    if (!temporal_seen_.insert(std::make_tuple(kind, loc, launch_)).second)
      return;
    trace_.temporal.push_back(TemporalEvent{kind, loc, target, launch_});
  }

  void commit(const PendingAccess& acc, bool legal) {
    const Alloc& a = allocs_[static_cast<std::size_t>(acc.alloc)];
    std::int64_t size = a.size - acc.start;
    bool partitioned = false;
    if (auto it = partitions_.find(acc.alloc); it != partitions_.end() && it->second.size() > 1) {
      const auto& starts = it->second;
      auto j = static_cast<std::size_t>(acc.part);
      size = (j + 1 < starts.size() ? starts[j + 1] : a.size) - starts[j];
      partitioned = true;
    }
    bool upper = acc.index >= size;
    bool under = acc.index < 0;
    std::int64_t cell = acc.start + acc.index;
    bool inside = cell >= 0 && cell < a.size;
    if (legal) {
      SiteSummary*& cached = site_cache_[acc.site];
      if (!cached)
        cached = &trace_.sites[acc.site->loc];
      SiteSummary& s = *cached;
      s.reached = true;
      s.upper = s.upper || upper;
      s.underflow = s.underflow || under;
      s.intra = s.intra || ((upper || under) && partitioned && inside);
    }
    if (!opt_.record_events)
      return;
    AccessEvent ev;
    ev.location = acc.site->loc;
    ev.target = acc.site->text;
    ev.space = space_label(a.space, partitioned);
    ev.kind = acc.kind;
    ev.launch = in_kernel_ ? launch_ : -1;
    ev.block = bid_;
    ev.thread = tid_;
    if (!in_kernel_)
      ev.block = ev.thread = {0, 0, 0};
    ev.offset = acc.index;
    ev.size = size;
    ev.in_bounds = !upper && !under;
    ev.partitioned = partitioned;
    ev.intra_violation = (upper || under) && partitioned && inside;
    ev.legal = legal;
    trace_.accesses.push_back(std::move(ev));
  }

  static std::string space_label(Space s, bool partitioned) {
    switch (s) {
    case Space::Host: return "host";
    case Space::Global: return partitioned ? "global-partition" : "global";
    case Space::SharedStatic: return "shared-static";
    case Space::SharedDynamic: return "shared-dynamic-partition";
    case Space::Local: return "local";
    }
    return "?";
  }

  // ---- statements ----
  Flow exec_list(const std::vector<StmtPtr>& list) {
    for (const auto& s : list)
      if (exec(*s) == Flow::Return)
        return Flow::Return;
    return Flow::Normal;
  }

  Flow exec(const Stmt& s) {
    step();
    switch (s.kind) {
    case Stmt::Kind::Decl: declare(s); return Flow::Normal;
    case Stmt::Kind::Store: {
      Value v = eval(*s.value);
      auto [alloc, idx] = access(*s.expr, s.compound ? AccessKind::ReadWrite : AccessKind::Write);
      if (alloc >= 0 && idx >= 0) {
        Alloc& a = allocs_[static_cast<std::size_t>(alloc)];
        a.write(idx, s.compound ? binary_values(BinaryOp::Add, a.read(idx), v, s.loc) : v);
      }
      return Flow::Normal;
    }
    case Stmt::Kind::Free: {
      const Value& v = slots_[static_cast<std::size_t>(s.decl)];
      if (v.k != Value::K::Ptr || v.p.opaque || v.p.alloc < 0)
        return Flow::Normal;
      Alloc& a = allocs_[static_cast<std::size_t>(v.p.alloc)];
      if (a.freed)
        temporal("double-free", s.loc, a.name);
      a.freed = true;
      return Flow::Normal;
    }
    case Stmt::Kind::Launch: launch(s); return Flow::Normal;
    case Stmt::Kind::Assert:
      if (!condition(s.cond))
        throw AssertFailure{s.loc};
      return Flow::Normal;
    case Stmt::Kind::For: {
      std::int64_t lo = as_int(eval(*s.expr), s.loc);
      std::int64_t hi = as_int(eval(*s.value), s.loc);
      if (s.inclusive)
        ++hi;
      auto slot = static_cast<std::size_t>(s.decl);
      for (std::int64_t i = lo; i < hi; ++i) {
        step();
        slots_[slot] = Value::integer(i);
        if (exec_list(s.body) == Flow::Return)
          return Flow::Return;
      }
      return Flow::Normal;
    }
    case Stmt::Kind::If:
      return exec_list(condition(s.cond) ? s.body : s.else_body);
    case Stmt::Kind::ExprStmt: eval(*s.expr); return Flow::Normal;
    case Stmt::Kind::Return:
      if (s.expr)
        eval(*s.expr);
      return Flow::Return;
    case Stmt::Kind::Block: return exec_list(s.body);
    }
    return Flow::Normal;
  }

  void declare(const Stmt& s) {
    const Decl& d = ast_.decl(s.decl);
    auto slot = static_cast<std::size_t>(s.decl);
    switch (d.kind) {
    case DeclKind::Scalar: {
      Value v = eval(*s.expr);
      if (is_integral(d.elem) && v.is_float())
        v = Value::integer(static_cast<std::int64_t>(v.f));
      else if (!is_integral(d.elem) && !v.is_float())
        v = Value::real(static_cast<double>(v.i));
      slots_[slot] = v;
      return;
    }
    case DeclKind::Pointer:
      switch (s.init) {
      case Stmt::Init::Malloc: {
        std::int64_t size = as_int(eval(*s.expr), s.loc);
        if (size < 0)
          fault(s.loc, "cudaMalloc with negative size " + std::to_string(size));
        int id = new_alloc(d.name, Space::Global, size, !is_integral(d.elem), nullptr);
        allocs_[static_cast<std::size_t>(id)].from_malloc = true;
        slots_[slot] = Value::pointer(Ptr{id, 0, 0, false});
        return;
      }
      case Stmt::Init::AddrOf: {
        const Expr& index = *s.expr;
        std::int64_t k = linear_index(index);
        const Value& base = slots_[static_cast<std::size_t>(index.decl)];
        if (base.k != Value::K::Ptr || base.p.opaque)
          fault(s.loc, "address of an element of a non-pointer");
        Ptr p = base.p;
        std::int64_t start;
        if (__builtin_add_overflow(p.offset, k, &start))
          fault(s.loc, "integer overflow");
        auto& starts = partitions_[p.alloc];
        if (starts.empty())
          starts.push_back(0);
        starts.push_back(start);
        slots_[slot] = Value::pointer(Ptr{p.alloc, start, static_cast<int>(starts.size()) - 1, false});
        return;
      }
      case Stmt::Init::Expr: slots_[slot] = eval(*s.expr); return;
      case Stmt::Init::None: slots_[slot] = Value::pointer(Ptr{-1, 0, 0, true}); return;
      }
      return;
    case DeclKind::Array: {
      if (d.is_extern) {
        if (dyn_shm_alloc_ < 0)
          fault(s.loc, "extern shared memory without a dynamic size at launch");
        slots_[slot] = Value::pointer(Ptr{dyn_shm_alloc_, 0, 0, false});
        return;
      }
      if (d.is_shared) {
        if (auto it = block_shared_.find(s.decl); it != block_shared_.end()) {
          slots_[slot] = Value::pointer(Ptr{it->second, 0, 0, false});
          return;
        }
      }
      std::vector<std::int64_t> dims;
      std::int64_t size = 1;
      for (const auto& e : d.dims) {
        std::int64_t n = as_int(eval(*e), e->loc);
        if (n < 0)
          fault(e->loc, "negative array extent " + std::to_string(n));
        if (__builtin_mul_overflow(size, n, &size))
          fault(e->loc, "integer overflow");
        dims.push_back(n);
      }
      extents_[s.decl] = dims;
      Space space = !in_kernel_ ? Space::Host : d.is_shared ? Space::SharedStatic : Space::Local;
      std::vector<int>* scope = !in_kernel_ ? nullptr : d.is_shared ? &block_scope_ : &thread_scope_;
      int id = new_alloc(d.name, space, size, !is_integral(d.elem), scope);
      if (d.is_shared)
        block_shared_[s.decl] = id;
      slots_[slot] = Value::pointer(Ptr{id, 0, 0, false});
      return;
    }
    }
  }

  void launch(const Stmt& s) {
    const Kernel& k = ast_.kernels.at(static_cast<std::size_t>(s.kernel));
    std::array<std::int64_t, 3> grid{1, 1, 1}, block{1, 1, 1};
    for (std::size_t a = 0; a < s.grid.comps.size(); ++a)
      grid[a] = as_int(eval(*s.grid.comps[a]), s.loc);
    for (std::size_t a = 0; a < s.block.comps.size(); ++a)
      block[a] = as_int(eval(*s.block.comps[a]), s.loc);
    std::optional<std::int64_t> shm;
    if (s.shm)
      shm = as_int(eval(*s.shm), s.loc);
    std::vector<Value> args;
    for (const auto& a : s.args)
      args.push_back(eval(*a));

    int index = trace_.launches++;
    launch_ = index;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i].k != Value::K::Ptr)
        continue;
      if (args[i].p.opaque)
        fault(s.loc, "uninitialized pointer passed to kernel '" + k.name + "'");
      const Alloc& a = allocs_[static_cast<std::size_t>(args[i].p.alloc)];
      if (a.freed)
        temporal("uaf", s.loc, a.name);
    }
    for (auto v : grid)
      if (v < 0)
        fault(s.loc, "negative grid dimension");
    for (auto v : block)
      if (v < 0)
        fault(s.loc, "negative block dimension");
    if (shm && *shm < 0)
      fault(s.loc, "negative dynamic shared memory size");
    std::int64_t threads = 1;
    for (auto v : grid)
      if (__builtin_mul_overflow(threads, v, &threads))
        fault(s.loc, "launch too large");
    for (auto v : block)
      if (__builtin_mul_overflow(threads, v, &threads))
        fault(s.loc, "launch too large");
    if (threads > kMaxThreadsPerLaunch)
      fault(s.loc, "launch too large for the interpreter");

    std::string extern_name = "extern shared";
    bool extern_float = false;
    for (const auto& d : ast_.decls)
      if (d.function == s.kernel && d.is_extern) {
        extern_name = d.name;
        extern_float = !is_integral(d.elem);
      }

    in_kernel_ = true;
    gdim_ = grid;
    bdim_ = block;
    for (bid_[2] = 0; bid_[2] < grid[2]; ++bid_[2])
      for (bid_[1] = 0; bid_[1] < grid[1]; ++bid_[1])
        for (bid_[0] = 0; bid_[0] < grid[0]; ++bid_[0]) {
          block_shared_.clear();
          dyn_shm_alloc_ = -1;
          if (shm)
            dyn_shm_alloc_ = new_alloc(extern_name, Space::SharedDynamic, *shm, extern_float, &block_scope_);
          for (tid_[2] = 0; tid_[2] < block[2]; ++tid_[2])
            for (tid_[1] = 0; tid_[1] < block[1]; ++tid_[1])
              for (tid_[0] = 0; tid_[0] < block[0]; ++tid_[0])
                run_thread(k, args);
          release(block_scope_);
        }
    in_kernel_ = false;
    launch_ = -1;
    tid_ = bid_ = bdim_ = gdim_ = {0, 0, 0};
  }

  void run_thread(const Kernel& k, const std::vector<Value>& args) {
    for (std::size_t i = 0; i < k.params.size(); ++i)
      slots_[static_cast<std::size_t>(k.params[i])] = args[i];
    partitions_.clear();
    pending_.clear();
    bool legal = true;
    try {
      exec_list(k.body);
    } catch (const AssertFailure&) {
      legal = false;
    } catch (const RuntimeFault& f) {
      trace_.errors.push_back(RuntimeEvent{f.loc, f.message, launch_});
    }
    for (const auto& acc : pending_)
      commit(acc, legal);
    pending_.clear();
    release(thread_scope_);
  }

  const Ast& ast_;
  const OracleOptions& opt_;
  ExecutionTrace trace_;
  std::vector<Value> slots_;
  std::vector<Alloc> allocs_;
  std::vector<int> free_ids_;
  std::vector<int> block_scope_, thread_scope_;
  std::map<DeclId, int> block_shared_;
  std::map<DeclId, std::vector<std::int64_t>> extents_;
  std::map<int, std::vector<std::int64_t>> partitions_;
  std::vector<PendingAccess> pending_;
  std::unordered_map<const Expr*, SiteSummary*> site_cache_;
  std::set<std::tuple<std::string, SourceLocation, int>> temporal_seen_;
  std::size_t input_pos_ = 0;
  std::uint64_t steps_ = 0;
  bool in_kernel_ = false;
  int launch_ = -1;
  int dyn_shm_alloc_ = -1;
  std::array<std::int64_t, 3> tid_{}, bid_{}, bdim_{}, gdim_{};
};

void collect_sites(const Expr& e, bool inputs, std::vector<SourceLocation>& out) {
  if (inputs && e.kind == Expr::Kind::Input)
    out.push_back(e.loc);
  if (!inputs && e.kind == Expr::Kind::Index)
    out.push_back(e.loc);
  for (const auto& a : e.args)
    collect_sites(*a, inputs, out);
}

void collect_sites(const Stmt& s, bool inputs, std::vector<SourceLocation>& out) {
  for (const auto* e : {s.expr.get(), s.value.get(), s.shm.get()})
    if (e)
      collect_sites(*e, inputs, out);
  for (const auto* d : {&s.grid, &s.block})
    for (const auto& c : d->comps)
      collect_sites(*c, inputs, out);
  for (const auto& a : s.args)
    collect_sites(*a, inputs, out);
  for (const auto& c : s.cond) {
    collect_sites(*c.lhs, inputs, out);
    collect_sites(*c.rhs, inputs, out);
  }
  for (const auto& b : s.body)
    collect_sites(*b, inputs, out);
  for (const auto& b : s.else_body)
    collect_sites(*b, inputs, out);
}

} // namespace

ExecutionTrace interpret(const Ast& ast, const OracleOptions& options) {
  return Interpreter(ast, options).run();
}

std::vector<SourceLocation> input_sites(const Ast& ast) {
  std::vector<SourceLocation> out;
  for (const auto& s : ast.host_main)
    collect_sites(*s, true, out);
  for (const auto& d : ast.decls)
    if (d.function < 0)
      for (const auto& e : d.dims)
        collect_sites(*e, true, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<SourceLocation> kernel_access_sites(const Ast& ast) {
  std::vector<SourceLocation> out;
  for (const auto& k : ast.kernels)
    for (const auto& s : k.body)
      collect_sites(*s, false, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BruteForceResult brute_force(const Ast& ast, std::int64_t bound) {
  std::vector<SourceLocation> sites = input_sites(ast);
  if (sites.size() > kBruteForceMaxInputs)
    throw OracleLimitError("brute force needs at most " + std::to_string(kBruteForceMaxInputs) +
                           " input sites, program has " + std::to_string(sites.size()));
  if (bound < 0 || bound > kBruteForceMaxBound)
    throw OracleLimitError("brute force bound must be in [0, " + std::to_string(kBruteForceMaxBound) + "]");
  std::vector<SourceLocation> accesses = kernel_access_sites(ast);
  BruteForceResult out;
  OracleOptions opt;
  opt.record_events = false;
  opt.default_input = 0;
  std::vector<std::int64_t> tuple(sites.size(), 0);
  for (;;) {
    for (std::size_t i = 0; i < sites.size(); ++i)
      opt.input_sites[sites[i]] = tuple[i];
    ExecutionTrace t = interpret(ast, opt);
    ++out.tuples;
    if (!t.host_assert_failed) {
      ++out.legal_runs;
      for (const auto& [loc, s] : t.sites) {
        SiteSummary& acc = out.sites[loc];
        acc.reached = acc.reached || s.reached;
        acc.upper = acc.upper || s.upper;
        acc.underflow = acc.underflow || s.underflow;
        acc.intra = acc.intra || s.intra;
      }
    }
    bool settled = !accesses.empty();
    for (const auto& loc : accesses) {
      auto it = out.sites.find(loc);
      if (it == out.sites.end() || !it->second.upper || !it->second.underflow) {
        settled = false;
        break;
      }
    }
    if (settled)
      break;
    std::size_t i = 0;
    while (i < tuple.size() && tuple[i] == bound)
      tuple[i++] = 0;
    if (i == tuple.size())
      break;
    ++tuple[i];
  }
  return out;
}

bool brute_force_verdict(const Ast& ast, const SourceLocation& access, std::int64_t bound) {
  BruteForceResult r = brute_force(ast, bound);
  auto it = r.sites.find(access);
  return it != r.sites.end() && (it->second.upper || it->second.underflow);
}

std::string trace_to_json_lines(const ExecutionTrace& t) {
  using nlohmann::ordered_json;
  std::string out;
  for (const auto& a : t.accesses) {
    ordered_json j;
    j["event"] = "access";
    j["file"] = a.location.file;
    j["line"] = a.location.line;
    j["column"] = a.location.column;
    j["target"] = a.target;
    j["space"] = a.space;
    j["kind"] = access_kind_name(a.kind);
    j["launch"] = a.launch;
    j["block"] = a.block;
    j["thread"] = a.thread;
    j["offset"] = a.offset;
    j["size"] = a.size;
    j["in_bounds"] = a.in_bounds;
    j["intra_violation"] = a.intra_violation;
    j["legal"] = a.legal;
    out += j.dump() + "\n";
  }
  for (const auto& e : t.temporal) {
    ordered_json j;
    j["event"] = e.kind;
    j["file"] = e.location.file;
    j["line"] = e.location.line;
    j["column"] = e.location.column;
    j["target"] = e.target;
    j["launch"] = e.launch;
    out += j.dump() + "\n";
  }
  for (const auto& e : t.errors) {
    ordered_json j;
    j["event"] = "runtime-error";
    j["file"] = e.location.file;
    j["line"] = e.location.line;
    j["column"] = e.location.column;
    j["launch"] = e.launch;
    j["message"] = e.message;
    out += j.dump() + "\n";
  }
  std::uint64_t violations = 0;
  for (const auto& a : t.accesses)
    if (!a.in_bounds && a.legal)
      ++violations;
  ordered_json s;
  s["event"] = "summary";
  s["inputs"] = t.inputs_used;
  s["launches"] = t.launches;
  s["accesses"] = t.access_count;
  s["violations"] = violations;
  s["host_assert_failed"] = t.host_assert_failed;
  s["aborted"] = t.aborted;
  out += s.dump() + "\n";
  return out;
}

} // namespace scuba
