#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scuba/expr_tree.hpp"
#include "scuba/ir.hpp"

namespace scuba {

struct AllocationRecord {
  ValueId alloc_value = kNoValue;
  EtPtr size_et;
  SourceLocation location;
  std::string name;
};

struct LaunchArg {
  bool is_pointer = false;
  ValueId pointer = kNoValue;     // pointer args: the value passed, copies resolved
  ValueId alloc = kNoValue;       // pointer args: matched allocation, or kNoValue if unresolved
  EtPtr size_et;                  // pointer args: the allocation's size tree
  EtPtr et;                       // integral scalar args
  std::string name;               // pointer args: the source name
  SourceLocation location;
};

struct Warning {
  SourceLocation location;
  std::string message;
};

struct KernelLaunchRecord {
  std::string kernel_name;
  int kernel = -1;
  int index = 0;                  // position among the module's launches
  // GDimX, GDimY, GDimZ, BDimX, BDimY, BDimZ; missing axes are Const(1).
  std::array<EtPtr, 6> dims;
  std::vector<LaunchArg> args;
  EtPtr dyn_shm_et;               // null when the launch passes none
  std::vector<EtCond> path_guards;
  SourceLocation location;
};

struct HostSummary {
  std::map<ValueId, AllocationRecord> allocs;
  std::vector<KernelLaunchRecord> launches;
  std::vector<EtCond> asserts;
  std::vector<std::pair<ValueId, SourceLocation>> frees;
  std::vector<Warning> warnings;
};

/// Walks host IR collecting allocations, launches, asserts and frees.
HostSummary analyze_host(const IrModule& module);

nlohmann::json to_json(const HostSummary& summary);

} // namespace scuba
