#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "pimsim/arch_config.hpp"
#include "pimsim/engine.hpp"

namespace pimsim {

struct EnergyBreakdown {
  double mvm_pj = 0;
  double adc_pj = 0;
  double vector_pj = 0;
  double noc_pj = 0;
  double memory_pj = 0;
  double scalar_pj = 0;
  double static_pj = 0;
  double total_pj = 0;
  friend bool operator==(const EnergyBreakdown&, const EnergyBreakdown&) = default;
};

struct LayerStats {
  int layer = 0;
  std::int64_t compute_cycles = 0;
  std::int64_t comm_cycles = 0;
  double comm_ratio = 0;
  friend bool operator==(const LayerStats&, const LayerStats&) = default;
};

struct CoreStats {
  int core = 0;
  std::array<double, kNumInstClasses> utilization{};
  std::array<std::int64_t, kNumInstClasses> inst_counts{};
  friend bool operator==(const CoreStats&, const CoreStats&) = default;
};

struct Report {
  std::int64_t total_cycles = 0;
  double frequency_hz = 0;
  double latency_s = 0;
  EnergyBreakdown energy;
  double avg_power_mw = 0;
  std::array<std::int64_t, kNumInstClasses> inst_counts{};
  EventTally events;
  std::vector<LayerStats> layers;
  std::vector<CoreStats> cores;  // cores that executed at least one instruction
  friend bool operator==(const Report&, const Report&) = default;
};

/// `num_layers` forces an entry for every layer id in [0, num_layers), even idle ones.
Report finalize_report(const SimResult& sim, const ArchConfig& cfg, int num_layers = 0);

/// Category energies from raw event counts; total is their sum in declaration order.
EnergyBreakdown energy_from(const EventTally& events, const EnergyParams& p, int num_cores, double latency_s);

std::string emit_report_json(const Report& r);
Report parse_report_json(std::string_view text);

inline constexpr std::string_view kCsvHeader = "point,scope,metric,value";
/// One row per (scope, metric, value); `header` prepends kCsvHeader.
std::string emit_report_csv(const Report& r, std::string_view point, bool header = true);

}  // namespace pimsim
