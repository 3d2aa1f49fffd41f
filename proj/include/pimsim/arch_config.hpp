#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pimsim/error.hpp"

namespace pimsim {

/// Mesh node coordinate. Core ids are row-major: id = y * mesh_width + x.
struct Coord {
  int x = 0;
  int y = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
};

struct TimingParams {
  std::int64_t mvm_setup_cycles = 4;
  std::int64_t adc_cycles_per_sample = 1;
  std::int64_t vec_setup_cycles = 1;
  std::int64_t vec_elems_per_cycle = 16;
  std::int64_t transfer_base_cycles = 2;
  std::int64_t noc_cycles_per_hop = 1;
  std::int64_t link_bytes_per_cycle = 16;
  std::int64_t gmem_base_cycles = 20;
  std::int64_t gmem_bytes_per_cycle = 16;
  std::int64_t scalar_cycles = 1;

  friend bool operator==(const TimingParams&, const TimingParams&) = default;
};

/// Energies in picojoules, static power in milliwatts. Placeholder defaults.
struct EnergyParams {
  double mvm_energy_per_xbar_pj = 10.0;
  double adc_energy_per_sample_pj = 2.0;
  double vec_energy_per_elem_pj = 0.5;
  double noc_energy_per_byte_hop_pj = 0.8;
  double mem_energy_per_byte_pj = 0.25;
  double scalar_energy_per_inst_pj = 0.5;
  double static_power_mw_per_core = 5.0;

  friend bool operator==(const EnergyParams&, const EnergyParams&) = default;
};

struct ArchConfig {
  int mesh_width = 1;
  int mesh_height = 1;
  Coord global_mem_node{};

  int xbars_per_core = 1;
  int xbar_rows = 128;
  int xbar_cols = 128;
  int adcs_per_xbar = 1;
  std::int64_t local_mem_bytes = 256 * 1024;
  int rob_size = 8;
  int dispatch_width = 4;
  int num_scalar_regs = 32;

  std::int64_t frequency_hz = 1'000'000'000;
  std::int64_t watchdog_cycles = 1'000'000;
  std::int64_t gmem_bytes = 16 * 1024 * 1024;

  TimingParams timing;
  EnergyParams energy;

  int num_cores() const { return mesh_width * mesh_height; }
  Coord coord_of(int core) const { return {core % mesh_width, core / mesh_width}; }
  int core_at(Coord c) const { return c.y * mesh_width + c.x; }
  bool contains(Coord c) const {
    return c.x >= 0 && c.y >= 0 && c.x < mesh_width && c.y < mesh_height;
  }

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

class ConfigError : public Error {
 public:
  enum class Kind { Syntax, Schema, Semantic };

  ConfigError(Kind kind, std::string path, const std::string& message)
      : Error(describe(kind, path, message)), kind_(kind), path_(std::move(path)) {}

  Kind kind() const { return kind_; }
  const std::string& path() const { return path_; }

 private:
  static std::string describe(Kind kind, const std::string& path, const std::string& message);

  Kind kind_;
  std::string path_;
};

/// Parses a JSON configuration document (schema in docs/config_schema.md).
/// Omitted optional fields take the defaults above; unknown fields are errors.
ArchConfig parse_config(std::string_view text);
ArchConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config(emit_config(c)) == c.
std::string emit_config(const ArchConfig& cfg);

std::vector<Violation> validate_config(const ArchConfig& cfg);

}  // namespace pimsim
