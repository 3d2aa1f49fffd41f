#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pimsim/arch_config.hpp"
#include "pimsim/isa.hpp"
#include "pimsim/nn_ir.hpp"

namespace pimsim {

enum class Strategy { UtilizationFirst, PerformanceFirst };

/// "utilization" / "performance"
std::string_view strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view s);

class CompileError : public Error {
 public:
  enum class Kind { CapacityExceeded, LocalMemoryOverflow, Unsupported };
  CompileError(Kind kind, const std::string& message) : Error(label(kind) + message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  static std::string label(Kind k) {
    switch (k) {
      case Kind::CapacityExceeded: return "capacity exceeded: ";
      case Kind::LocalMemoryOverflow: return "local memory overflow: ";
      case Kind::Unsupported: return "unsupported: ";
    }
    return "";
  }
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Tiling

struct Tile {
  int row_block = 0;
  int col_block = 0;
  int rows_used = 0;
  int cols_used = 0;
  friend bool operator==(const Tile&, const Tile&) = default;
};

/// Crossbar-sized blocks of one weight matrix, in (row_block, col_block) order.
struct Tiling {
  int layer_id = 0;
  int matrix_rows = 0;
  int matrix_cols = 0;
  int row_blocks = 0;
  int col_blocks = 0;
  std::vector<Tile> tiles;
};

Tiling tile_matrix(int rows, int cols, const ArchConfig& cfg, int layer_id = 0);

/// Tilings for every crossbar-backed layer (conv, fc, avg pool) in network order.
std::vector<Tiling> tile_network(const Network& net, const ArchConfig& cfg);

// ---------------------------------------------------------------------------
// Mapping

struct TileSlot {
  int layer_id = 0;
  int row_block = 0;
  int col_block = 0;
  int core = 0;
  int xbar = 0;
  friend bool operator==(const TileSlot&, const TileSlot&) = default;
};

struct Placement {
  int num_cores = 0;
  int xbars_per_core = 0;
  std::vector<TileSlot> slots;  // mapping order

  std::vector<int> used_per_core() const;
  std::set<int> layers_on_core(int core) const;
  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Packs tiles tightly: core i fills completely before core i+1; layers may share cores.
Placement map_utilization_first(std::span<const Tiling> tilings, const ArchConfig& cfg);
/// Each layer claims fresh cores; no core holds tiles of two layers.
Placement map_performance_first(std::span<const Tiling> tilings, const ArchConfig& cfg);
Placement map_tiles(std::span<const Tiling> tilings, const ArchConfig& cfg, Strategy s);

/// Checks the placement invariants (coverage, exclusivity, capacity, strategy rules).
std::vector<Violation> check_placement(const Placement& p, std::span<const Tiling> tilings, Strategy s);

// ---------------------------------------------------------------------------
// Local memory

struct BufferRequest {
  std::string name;
  Len bytes = 0;
  Len align = 4;
};

struct Region {
  std::string name;
  Addr addr = 0;
  Len bytes = 0;
};

struct AddressMap {
  int core = 0;
  std::vector<Region> regions;
  Len used = 0;

  const Region& at(std::string_view name) const;
};

/// Bump-allocates each core's requests in order; regions never overlap.
std::vector<AddressMap> allocate_memory(const std::vector<std::vector<BufferRequest>>& per_core,
                                        const ArchConfig& cfg);

// ---------------------------------------------------------------------------
// Code generation

struct CodegenResult {
  Program program;
  std::vector<AddressMap> memory;
  std::vector<int> layer_core;  // core holding each layer's output
};

CodegenResult schedule_and_codegen(const Network& net, std::span<const Tiling> tilings,
                                   const Placement& placement, const ArchConfig& cfg);

/// Global-memory address where the terminal layer's output is stored.
Addr output_gaddr(const Network& net);

struct CompileResult {
  Strategy strategy = Strategy::PerformanceFirst;
  std::vector<Tiling> tilings;
  Placement placement;
  Program program;
  std::vector<AddressMap> memory;
  std::vector<int> layer_core;
  Addr output_addr = 0;
  Len output_bytes = 0;
};

CompileResult compile(const Network& net, const ArchConfig& cfg, Strategy strategy);

/// JSON document: per-layer tiles/cores and per-core memory map.
std::string placement_report(const Network& net, const CompileResult& result);

/// Multiplier/shift such that requantize(sum, m, s) == round_half_away(sum / count)
/// for every sum of `count` int8 values.
QuantParams average_quant(int count);

}  // namespace pimsim
