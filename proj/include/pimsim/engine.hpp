#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pimsim/arch_config.hpp"
#include "pimsim/isa.hpp"
#include "pimsim/noc.hpp"

namespace pimsim {

using Cycle = std::int64_t;

struct InstRecord {
  int core = 0;
  int index = 0;
  int layer = -1;
  InstClass cls = InstClass::Scalar;
  std::string mnemonic;  // with width suffix where applicable
  Cycle issue = 0;
  Cycle complete = 0;
};

struct TransferRecord {
  TransferKind kind = TransferKind::SendRecv;
  int src_core = 0;  // issuing core for LOAD/STORE
  int dst_core = 0;
  int tag = -1;
  Len bytes = 0;
  int hops = 0;
  int layer = -1;
  Cycle ready = 0;
  Cycle start = 0;
  Cycle complete = 0;
  std::vector<Link> links;
};

/// Raw event counts; energy is derived from these by the metrics module.
struct EventTally {
  std::int64_t xbar_activations = 0;
  std::int64_t adc_samples = 0;
  std::int64_t vector_elems = 0;
  std::int64_t noc_byte_hops = 0;
  std::int64_t mem_bytes = 0;
  std::int64_t scalar_insts = 0;
  friend bool operator==(const EventTally&, const EventTally&) = default;
};

using PerClass = std::array<std::int64_t, kNumInstClasses>;

struct SimResult {
  Cycle total_cycles = 0;
  int num_cores = 0;
  std::vector<Cycle> halt_cycle;       // per core
  std::vector<PerClass> busy_cycles;   // per core, union of unit-busy intervals
  std::vector<PerClass> inst_counts;   // per core
  std::vector<InstRecord> records;     // dispatch order
  std::vector<TransferRecord> transfers;
  std::vector<std::uint8_t> gmem;
  EventTally tally;
};

struct SimOptions {
  /// Visit every cycle instead of jumping between events; results are identical.
  bool step_every_cycle = false;
};

class DeadlockError : public Error {
 public:
  DeadlockError(Cycle cycle, std::string dump)
      : Error("deadlock: no progress for the watchdog period, detected at cycle " + std::to_string(cycle)),
        cycle_(cycle),
        dump_(std::move(dump)) {}
  Cycle cycle() const { return cycle_; }
  const std::string& dump() const { return dump_; }

 private:
  Cycle cycle_;
  std::string dump_;
};

/// Runs `program` to completion. `gmem_init` is copied to the start of global memory.
SimResult simulate(const Program& program, const ArchConfig& cfg, std::span<const std::uint8_t> gmem_init,
                   const SimOptions& options = {});

/// One JSON object per line: instructions in dispatch order, then transfers with their links.
std::string trace_jsonl(const SimResult& sim);

}  // namespace pimsim
