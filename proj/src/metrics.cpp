#include "pimsim/metrics.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

namespace pimsim {

namespace {

std::int64_t union_length(std::vector<std::pair<std::int64_t, std::int64_t>>& iv) {
  std::sort(iv.begin(), iv.end());
  std::int64_t total = 0, lo = 0, hi = -1;
  for (const auto& [a, b] : iv) {
    if (a > hi) {
      if (hi > lo) total += hi - lo;
      lo = a;
      hi = b;
    } else {
      hi = std::max(hi, b);
    }
  }
  if (hi > lo) total += hi - lo;
  return total;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

constexpr std::array<std::string_view, kNumInstClasses> kClassKeys = {"matrix", "vector", "transfer", "scalar"};

}  // namespace

EnergyBreakdown energy_from(const EventTally& ev, const EnergyParams& p, int num_cores, double latency_s) {
  EnergyBreakdown e;
  e.mvm_pj = static_cast<double>(ev.xbar_activations) * p.mvm_energy_per_xbar_pj;
  e.adc_pj = static_cast<double>(ev.adc_samples) * p.adc_energy_per_sample_pj;
  e.vector_pj = static_cast<double>(ev.vector_elems) * p.vec_energy_per_elem_pj;
  e.noc_pj = static_cast<double>(ev.noc_byte_hops) * p.noc_energy_per_byte_hop_pj;
  e.memory_pj = static_cast<double>(ev.mem_bytes) * p.mem_energy_per_byte_pj;
  e.scalar_pj = static_cast<double>(ev.scalar_insts) * p.scalar_energy_per_inst_pj;
  // mW * s = mJ = 1e9 pJ
  e.static_pj = p.static_power_mw_per_core * num_cores * latency_s * 1e9;
  e.total_pj = e.mvm_pj + e.adc_pj + e.vector_pj + e.noc_pj + e.memory_pj + e.scalar_pj + e.static_pj;
  return e;
}

Report finalize_report(const SimResult& sim, const ArchConfig& cfg, int num_layers) {
  Report r;
  r.total_cycles = sim.total_cycles;
  r.frequency_hz = static_cast<double>(cfg.frequency_hz);
  r.latency_s = static_cast<double>(sim.total_cycles) / r.frequency_hz;
  r.events = sim.tally;
  r.energy = energy_from(sim.tally, cfg.energy, cfg.num_cores(), r.latency_s);
  r.avg_power_mw = r.latency_s > 0 ? r.energy.total_pj * 1e-9 / r.latency_s : 0.0;

  using Intervals = std::vector<std::pair<std::int64_t, std::int64_t>>;
  std::map<int, std::pair<Intervals, Intervals>> per_layer;  // (compute, comm)
  for (int l = 0; l < num_layers; ++l) per_layer[l];
  for (const auto& rec : sim.records) {
    if (rec.layer < 0) continue;
    auto& slot = per_layer[rec.layer];
    (rec.cls == InstClass::Transfer ? slot.second : slot.first).emplace_back(rec.issue, rec.complete);
  }
  for (auto& [id, iv] : per_layer) {
    LayerStats s;
    s.layer = id;
    s.compute_cycles = union_length(iv.first);
    s.comm_cycles = union_length(iv.second);
    const auto sum = s.compute_cycles + s.comm_cycles;
    s.comm_ratio = sum > 0 ? static_cast<double>(s.comm_cycles) / static_cast<double>(sum) : 0.0;
    r.layers.push_back(s);
  }

  for (std::size_t c = 0; c < sim.inst_counts.size(); ++c) {
    CoreStats cs;
    cs.core = static_cast<int>(c);
    bool any = false;
    for (std::size_t k = 0; k < kNumInstClasses; ++k) {
      cs.inst_counts[k] = sim.inst_counts[c][k];
      r.inst_counts[k] += sim.inst_counts[c][k];
      any |= cs.inst_counts[k] > 0;
      cs.utilization[k] = sim.total_cycles > 0 ? static_cast<double>(sim.busy_cycles[c][k]) /
                                                     static_cast<double>(sim.total_cycles)
                                               : 0.0;
    }
    if (any) r.cores.push_back(cs);
  }
  return r;
}

std::string emit_report_json(const Report& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["total_cycles"] = r.total_cycles;
  j["frequency_hz"] = r.frequency_hz;
  j["latency_s"] = r.latency_s;
  j["energy_pj"] = {{"mvm", r.energy.mvm_pj},       {"adc", r.energy.adc_pj},       {"vector", r.energy.vector_pj},
                    {"noc", r.energy.noc_pj},       {"memory", r.energy.memory_pj}, {"scalar", r.energy.scalar_pj},
                    {"static", r.energy.static_pj}, {"total", r.energy.total_pj}};
  j["avg_power_mw"] = r.avg_power_mw;
  ordered_json counts;
  for (std::size_t k = 0; k < kNumInstClasses; ++k) counts[std::string(kClassKeys[k])] = r.inst_counts[k];
  j["inst_counts"] = counts;
  j["events"] = {{"xbar_activations", r.events.xbar_activations}, {"adc_samples", r.events.adc_samples},
                 {"vector_elems", r.events.vector_elems},         {"noc_byte_hops", r.events.noc_byte_hops},
                 {"mem_bytes", r.events.mem_bytes},               {"scalar_insts", r.events.scalar_insts}};
  ordered_json layers = ordered_json::array();
  for (const auto& l : r.layers)
    layers.push_back({{"layer", l.layer},
                      {"compute_cycles", l.compute_cycles},
                      {"comm_cycles", l.comm_cycles},
                      {"comm_ratio", l.comm_ratio}});
  j["layers"] = layers;
  ordered_json cores = ordered_json::array();
  for (const auto& c : r.cores) {
    ordered_json jc;
    jc["core"] = c.core;
    ordered_json util, cnt;
    for (std::size_t k = 0; k < kNumInstClasses; ++k) {
      util[std::string(kClassKeys[k])] = c.utilization[k];
      cnt[std::string(kClassKeys[k])] = c.inst_counts[k];
    }
    jc["utilization"] = util;
    jc["inst_counts"] = cnt;
    cores.push_back(jc);
  }
  j["cores"] = cores;
  return j.dump(2) + "\n";
}

Report parse_report_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("report: ") + e.what());
  }
  try {
    Report r;
    r.total_cycles = j.at("total_cycles").get<std::int64_t>();
    r.frequency_hz = j.at("frequency_hz").get<double>();
    r.latency_s = j.at("latency_s").get<double>();
    const auto& e = j.at("energy_pj");
    r.energy.mvm_pj = e.at("mvm").get<double>();
    r.energy.adc_pj = e.at("adc").get<double>();
    r.energy.vector_pj = e.at("vector").get<double>();
    r.energy.noc_pj = e.at("noc").get<double>();
    r.energy.memory_pj = e.at("memory").get<double>();
    r.energy.scalar_pj = e.at("scalar").get<double>();
    r.energy.static_pj = e.at("static").get<double>();
    r.energy.total_pj = e.at("total").get<double>();
    r.avg_power_mw = j.at("avg_power_mw").get<double>();
    for (std::size_t k = 0; k < kNumInstClasses; ++k)
      r.inst_counts[k] = j.at("inst_counts").at(std::string(kClassKeys[k])).get<std::int64_t>();
    const auto& ev = j.at("events");
    r.events.xbar_activations = ev.at("xbar_activations").get<std::int64_t>();
    r.events.adc_samples = ev.at("adc_samples").get<std::int64_t>();
    r.events.vector_elems = ev.at("vector_elems").get<std::int64_t>();
    r.events.noc_byte_hops = ev.at("noc_byte_hops").get<std::int64_t>();
    r.events.mem_bytes = ev.at("mem_bytes").get<std::int64_t>();
    r.events.scalar_insts = ev.at("scalar_insts").get<std::int64_t>();
    for (const auto& l : j.at("layers"))
      r.layers.push_back({l.at("layer").get<int>(), l.at("compute_cycles").get<std::int64_t>(),
                          l.at("comm_cycles").get<std::int64_t>(), l.at("comm_ratio").get<double>()});
    for (const auto& c : j.at("cores")) {
      CoreStats cs;
      cs.core = c.at("core").get<int>();
      for (std::size_t k = 0; k < kNumInstClasses; ++k) {
        cs.utilization[k] = c.at("utilization").at(std::string(kClassKeys[k])).get<double>();
        cs.inst_counts[k] = c.at("inst_counts").at(std::string(kClassKeys[k])).get<std::int64_t>();
      }
      r.cores.push_back(cs);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("report: ") + e.what());
  }
}

std::string emit_report_csv(const Report& r, std::string_view point, bool header) {
  std::ostringstream os;
  if (header) os << kCsvHeader << "\n";
  auto row = [&](std::string_view scope, std::string_view metric, const std::string& value) {
    os << point << "," << scope << "," << metric << "," << value << "\n";
  };
  row("global", "total_cycles", std::to_string(r.total_cycles));
  row("global", "frequency_hz", fmt(r.frequency_hz));
  row("global", "latency_s", fmt(r.latency_s));
  row("energy", "mvm_pj", fmt(r.energy.mvm_pj));
  row("energy", "adc_pj", fmt(r.energy.adc_pj));
  row("energy", "vector_pj", fmt(r.energy.vector_pj));
  row("energy", "noc_pj", fmt(r.energy.noc_pj));
  row("energy", "memory_pj", fmt(r.energy.memory_pj));
  row("energy", "scalar_pj", fmt(r.energy.scalar_pj));
  row("energy", "static_pj", fmt(r.energy.static_pj));
  row("energy", "total_pj", fmt(r.energy.total_pj));
  row("global", "avg_power_mw", fmt(r.avg_power_mw));
  for (std::size_t k = 0; k < kNumInstClasses; ++k)
    row("global", "inst_count." + std::string(kClassKeys[k]), std::to_string(r.inst_counts[k]));
  row("events", "xbar_activations", std::to_string(r.events.xbar_activations));
  row("events", "adc_samples", std::to_string(r.events.adc_samples));
  row("events", "vector_elems", std::to_string(r.events.vector_elems));
  row("events", "noc_byte_hops", std::to_string(r.events.noc_byte_hops));
  row("events", "mem_bytes", std::to_string(r.events.mem_bytes));
  row("events", "scalar_insts", std::to_string(r.events.scalar_insts));
  for (const auto& l : r.layers) {
    const std::string scope = "layer:" + std::to_string(l.layer);
    row(scope, "compute_cycles", std::to_string(l.compute_cycles));
    row(scope, "comm_cycles", std::to_string(l.comm_cycles));
    row(scope, "comm_ratio", fmt(l.comm_ratio));
  }
  for (const auto& c : r.cores) {
    const std::string scope = "core:" + std::to_string(c.core);
    for (std::size_t k = 0; k < kNumInstClasses; ++k)
      row(scope, "utilization." + std::string(kClassKeys[k]), fmt(c.utilization[k]));
    for (std::size_t k = 0; k < kNumInstClasses; ++k)
      row(scope, "inst_count." + std::string(kClassKeys[k]), std::to_string(c.inst_counts[k]));
  }
  return os.str();
}

}  // namespace pimsim
