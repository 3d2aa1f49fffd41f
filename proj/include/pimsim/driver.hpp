#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pimsim/compiler.hpp"
#include "pimsim/engine.hpp"
#include "pimsim/metrics.hpp"

namespace pimsim {

/// Global memory image with the network input at address 0.
std::vector<std::uint8_t> gmem_image(std::span<const std::int8_t> input);

/// Terminal output read back from a finished simulation.
std::vector<std::int8_t> read_output(const SimResult& sim, const Network& net);

struct NetRun {
  CompileResult compiled;
  SimResult sim;
  Report report;
  std::vector<std::int8_t> input;
  std::vector<std::int8_t> output;
};

/// Compile + simulate. An empty `input` means default_input(net).
NetRun run_network(const Network& net, const ArchConfig& cfg, Strategy strategy,
                   std::span<const std::int8_t> input = {}, const SimOptions& options = {});

struct SweepPoint {
  std::string label;
  Strategy strategy = Strategy::PerformanceFirst;
  int rob_size = 0;
  Report report;
};

enum class SweepAxis { RobSize, Strategy };

struct SweepSpec {
  SweepAxis axis = SweepAxis::RobSize;
  std::vector<int> rob_sizes;          // RobSize axis
  std::vector<Strategy> strategies;    // Strategy axis
  Strategy base_strategy = Strategy::PerformanceFirst;
};

/// Parses "rob=1,2,4" or "strategy=both" / "strategy=utilization,performance".
SweepSpec parse_sweep_axis(const std::string& text);

/// Points run concurrently on up to `jobs` threads; results come back in axis order.
std::vector<SweepPoint> run_sweep(const Network& net, const ArchConfig& cfg, const SweepSpec& spec, int jobs = 1);

inline constexpr std::string_view kSweepHeader =
    "point,strategy,rob_size,total_cycles,latency_s,total_energy_pj,avg_power_mw";
std::string sweep_summary_csv(const std::vector<SweepPoint>& points);
/// Every point's full report CSV under one shared header.
std::string sweep_detail_csv(const std::vector<SweepPoint>& points);

/// Exit codes: 0 ok, 1 domain error, 2 usage, 3 deadlock.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pimsim
