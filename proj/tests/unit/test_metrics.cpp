#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "pimsim/driver.hpp"
#include "pimsim/metrics.hpp"

using namespace pimsim;

namespace {

InstRecord rec(int layer, InstClass cls, Cycle a, Cycle b) {
  InstRecord r;
  r.layer = layer;
  r.cls = cls;
  r.issue = a;
  r.complete = b;
  return r;
}

SimResult blank(int cores, Cycle total) {
  SimResult s;
  s.total_cycles = total;
  s.num_cores = cores;
  s.halt_cycle.assign(cores, total);
  s.busy_cycles.assign(cores, PerClass{});
  s.inst_counts.assign(cores, PerClass{});
  return s;
}

}  // namespace

TEST_CASE("energy categories are additive") {
  EnergyParams p;
  p.mvm_energy_per_xbar_pj = 5;
  p.static_power_mw_per_core = 0;
  EventTally ev;
  ev.xbar_activations = 3;
  auto e = energy_from(ev, p, 4, 1e-6);
  CHECK(e.mvm_pj == 15.0);
  CHECK(e.adc_pj == 0.0);
  CHECK(e.total_pj == 15.0);

  ev.adc_samples = 10;
  ev.vector_elems = 7;
  ev.noc_byte_hops = 11;
  ev.mem_bytes = 13;
  ev.scalar_insts = 2;
  p.static_power_mw_per_core = 2;
  auto f = energy_from(ev, p, 4, 1e-6);
  CHECK(f.static_pj == doctest::Approx(2 * 4 * 1e-6 * 1e9));
  CHECK(f.total_pj == f.mvm_pj + f.adc_pj + f.vector_pj + f.noc_pj + f.memory_pj + f.scalar_pj + f.static_pj);
}

TEST_CASE("communication ratio") {
  auto s = blank(1, 100);
  s.records.push_back(rec(0, InstClass::Transfer, 0, 50));
  s.records.push_back(rec(0, InstClass::Transfer, 40, 77));  // overlap counted once
  s.records.push_back(rec(0, InstClass::Matrix, 77, 90));
  s.records.push_back(rec(0, InstClass::Vector, 85, 100));
  s.records.push_back(rec(-1, InstClass::Scalar, 0, 100));
  auto r = finalize_report(s, ArchConfig{}, 3);
  REQUIRE(r.layers.size() == 3);
  CHECK(r.layers[0].comm_cycles == 77);
  CHECK(r.layers[0].compute_cycles == 23);
  CHECK(r.layers[0].comm_ratio == doctest::Approx(0.77));
  CHECK(r.layers[2].comm_ratio == 0.0);
}

TEST_CASE("empty chip has only static energy") {
  auto cfg = test::desk();
  auto s = simulate(parse_asm(".core 0\nHALT\n.core 5\nHALT\n"), cfg, {});
  auto r = finalize_report(s, cfg);
  CHECK(r.energy.mvm_pj == 0);
  CHECK(r.energy.adc_pj == 0);
  CHECK(r.energy.vector_pj == 0);
  CHECK(r.energy.noc_pj == 0);
  CHECK(r.energy.memory_pj == 0);
  CHECK(r.energy.static_pj > 0);
  // HALT is a scalar instruction and costs its share.
  CHECK(r.energy.total_pj == r.energy.static_pj + r.energy.scalar_pj);
  CHECK(r.avg_power_mw == doctest::Approx(r.energy.total_pj * 1e-9 / r.latency_s));
}

TEST_CASE("report round-trips through JSON and lists every layer") {
  auto net = test::fixture_net("tiny_resnet");
  auto run = run_network(net, test::desk(), Strategy::PerformanceFirst);
  const auto& r = run.report;
  CHECK(r.layers.size() == net.layers.size());
  for (std::size_t i = 0; i < r.layers.size(); ++i) {
    CHECK(r.layers[i].layer == static_cast<int>(i));
    CHECK(r.layers[i].comm_ratio >= 0.0);
    CHECK(r.layers[i].comm_ratio <= 1.0);
  }
  for (const auto& c : r.cores)
    for (double u : c.utilization) {
      CHECK(u >= 0.0);
      CHECK(u <= 1.0);
    }
  CHECK(parse_report_json(emit_report_json(r)) == r);
  CHECK_THROWS_AS(parse_report_json("{\"total_cycles\": 1}"), Error);
}

TEST_CASE("CSV layout") {
  auto run = run_network(test::fixture_net("mlp3"), test::desk(), Strategy::UtilizationFirst);
  std::string csv = emit_report_csv(run.report, "p0");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == kCsvHeader);
  int rows = 0;
  bool saw_ratio = false;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.rfind("p0,", 0) == 0);
    CHECK(std::count(line.begin(), line.end(), ',') == 3);
    saw_ratio |= line.find("layer:2,comm_ratio") != std::string::npos;
  }
  CHECK(rows > 10);
  CHECK(saw_ratio);
  CHECK(emit_report_csv(run.report, "p0", false) == csv.substr(kCsvHeader.size() + 1));
}

TEST_CASE("doubling energy parameters doubles every energy figure") {
  auto net = test::fixture_net("mlp3");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.01, 20.0);
  auto base = test::desk();
  auto sim = run_network(net, base, Strategy::PerformanceFirst).sim;
  for (int i = 0; i < 50; ++i) {
    auto cfg = base;
    auto& e = cfg.energy;
    e = {d(rng), d(rng), d(rng), d(rng), d(rng), d(rng), d(rng)};
    auto twice = cfg;
    auto& t = twice.energy;
    t = {2 * e.mvm_energy_per_xbar_pj,     2 * e.adc_energy_per_sample_pj, 2 * e.vec_energy_per_elem_pj,
         2 * e.noc_energy_per_byte_hop_pj, 2 * e.mem_energy_per_byte_pj,   2 * e.scalar_energy_per_inst_pj,
         2 * e.static_power_mw_per_core};
    auto a = finalize_report(sim, cfg);
    auto b = finalize_report(sim, twice);
    CHECK(b.energy.mvm_pj == 2 * a.energy.mvm_pj);
    CHECK(b.energy.adc_pj == 2 * a.energy.adc_pj);
    CHECK(b.energy.vector_pj == 2 * a.energy.vector_pj);
    CHECK(b.energy.noc_pj == 2 * a.energy.noc_pj);
    CHECK(b.energy.memory_pj == 2 * a.energy.memory_pj);
    CHECK(b.energy.scalar_pj == 2 * a.energy.scalar_pj);
    CHECK(b.energy.static_pj == 2 * a.energy.static_pj);
    CHECK(b.energy.total_pj == 2 * a.energy.total_pj);
    CHECK(b.total_cycles == a.total_cycles);
  }
  // Cycle counts do not depend on energy parameters at all.
  auto cfg = base;
  cfg.energy.mvm_energy_per_xbar_pj *= 2;
  CHECK(run_network(net, cfg, Strategy::PerformanceFirst).sim.total_cycles == sim.total_cycles);
}
