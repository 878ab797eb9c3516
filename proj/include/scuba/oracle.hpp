#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scuba/ast.hpp"
#include "scuba/ir.hpp"

namespace scuba {

struct OracleOptions {
  std::vector<std::int64_t> inputs;                      // by dynamic __input() order
  std::map<SourceLocation, std::int64_t> input_sites;    // by __input() site, checked first
  std::map<SourceLocation, std::int64_t> load_overrides; // value returned by loads at a site
  std::optional<std::int64_t> default_input;             // when neither supplies a value
  bool record_events = true;
  std::uint64_t step_limit = 200'000'000;
};

struct AccessEvent {
  SourceLocation location;
  std::string target;
  std::string space;
  AccessKind kind = AccessKind::Read;
  int launch = -1;                        // -1 for host accesses
  std::array<std::int64_t, 3> block{};
  std::array<std::int64_t, 3> thread{};
  std::int64_t offset = 0;                // relative to the accessed pointer
  std::int64_t size = 0;                  // of the accessed partition or allocation
  bool in_bounds = true;
  bool partitioned = false;
  bool intra_violation = false;           // outside the partition, inside the allocation
  bool legal = true;                      // false when the thread later failed an assert
};

struct TemporalEvent {
  std::string kind;                       // "uaf" or "double-free"
  SourceLocation location;
  std::string target;
  int launch = -1;
};

struct RuntimeEvent {
  SourceLocation location;
  std::string message;
  int launch = -1;
};

/// Per-site outcome over the legal accesses of a run.
struct SiteSummary {
  bool reached = false;
  bool upper = false;
  bool underflow = false;
  bool intra = false;
};

struct ExecutionTrace {
  std::vector<AccessEvent> accesses;
  std::vector<TemporalEvent> temporal;
  std::vector<RuntimeEvent> errors;
  std::map<SourceLocation, SiteSummary> sites;
  std::vector<std::int64_t> inputs_used;
  std::uint64_t access_count = 0;
  int launches = 0;
  bool host_assert_failed = false;        // the run is not a legal execution
  bool aborted = false;                   // host stopped on a runtime error
};

/// Executes the program: host statements in order and, per launch, every
/// thread of every block (blocks in linear order, then threads). Shared
/// memory is per block, local memory per thread, and unset cells read 0.
ExecutionTrace interpret(const Ast& ast, const OracleOptions& options = {});

/// JSON lines: one object per event, then a summary.
std::string trace_to_json_lines(const ExecutionTrace& trace);

class OracleLimitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Sites of __input() calls in host code, in source order.
std::vector<SourceLocation> input_sites(const Ast& ast);
/// Locations of every kernel memory access expression.
std::vector<SourceLocation> kernel_access_sites(const Ast& ast);

struct BruteForceResult {
  std::map<SourceLocation, SiteSummary> sites;
  std::uint64_t tuples = 0;
  std::uint64_t legal_runs = 0;
};

inline constexpr std::size_t kBruteForceMaxInputs = 5;
inline constexpr std::int64_t kBruteForceMaxBound = 64;

/// Runs every input tuple in [0, bound]^k, one value per __input() site.
/// Throws OracleLimitError beyond 5 sites or a bound above 64.
BruteForceResult brute_force(const Ast& ast, std::int64_t bound);

/// True iff some legal run violates bounds (either direction) at `access`.
bool brute_force_verdict(const Ast& ast, const SourceLocation& access, std::int64_t bound);

} // namespace scuba
