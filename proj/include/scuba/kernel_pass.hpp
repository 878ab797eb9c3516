#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scuba/expr_tree.hpp"
#include "scuba/host_pass.hpp"
#include "scuba/ir.hpp"

namespace scuba {

struct PartitionRecord {
  ValueId part_value = kNoValue;
  EtPtr offset_et;               // relative to the partitioned allocation
  SourceLocation location;
  std::string name;
};

/// Partitions carved from one allocation, in creation order. The allocation
/// itself is the first entry with offset Const(0).
struct PartitionList {
  ValueId base = kNoValue;
  Space space = Space::SharedDynamic;
  EtPtr total_size;              // null when the allocation size is unknown
  std::vector<PartitionRecord> parts;
};

struct MemoryAccessRecord {
  ValueId target = kNoValue;     // allocation, partition or pointer parameter
  EtPtr offset_et;
  AccessKind access_kind = AccessKind::Read;
  bool atomic = false;
  std::vector<EtCond> path_guards;  // innermost last
  SourceLocation location;
  std::string target_name;
  Space space = Space::Global;
  bool is_partition = false;     // target is one of several partitions of an allocation
  ValueId root = kNoValue;       // allocation or parameter the target belongs to
};

struct KernelSummary {
  std::string kernel_name;
  int kernel = -1;
  std::map<ValueId, EtPtr> k_allocs;
  std::vector<PartitionList> partitions;
  std::vector<MemoryAccessRecord> mem_instrs;
  std::vector<EtCond> asserts;
};

/// Walks a kernel's IR for one launch. Scalar parameters are bound to the
/// launch's argument trees. Throws FrontendError(Semantic) if the kernel
/// declares extern shared memory and the launch passes no dynamic size.
KernelSummary analyze_kernel(const IrModule& module, int kernel, const KernelLaunchRecord& launch);

/// Size of each partition: next offset minus own offset, and total minus
/// offset for the last one.
std::vector<EtPtr> derive_partition_sizes(const std::vector<PartitionRecord>& partitions,
                                          const EtPtr& total);

/// Size tree of an access target: k_allocs first, then the launch argument
/// of a pointer parameter. Null when unknown.
EtPtr target_size(const IrModule& module, const KernelSummary& kern,
                  const KernelLaunchRecord& launch, ValueId target);

const char* space_name(Space space);

nlohmann::json to_json(const KernelSummary& summary);

} // namespace scuba
