#include "pimsim/arch_config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pimsim {

using json = nlohmann::json;

std::string ConfigError::describe(Kind kind, const std::string& path, const std::string& message) {
  const char* label = kind == Kind::Syntax   ? "syntax error"
                      : kind == Kind::Schema ? "schema error"
                                             : "semantic error";
  std::string out = std::string("config ") + label;
  if (!path.empty()) out += " at '" + path + "'";
  return out + ": " + message;
}

namespace {

// Reads one JSON object section, rejecting keys outside the allowed set.
class Section {
 public:
  Section(const json& root, std::string name, std::set<std::string> allowed, bool required)
      : name_(std::move(name)) {
    auto it = root.find(name_);
    if (it == root.end()) {
      if (required) throw ConfigError(ConfigError::Kind::Schema, name_, "missing required section");
      return;
    }
    if (!it->is_object()) throw ConfigError(ConfigError::Kind::Schema, name_, "expected an object");
    obj_ = &*it;
    for (const auto& [key, _] : obj_->items()) {
      if (!allowed.count(key))
        throw ConfigError(ConfigError::Kind::Schema, path(key), "unknown field");
    }
  }

  template <typename T>
  void integer(const std::string& key, T& out, bool required = false) {
    const json* v = find(key, required);
    if (!v) return;
    if (!v->is_number_integer())
      throw ConfigError(ConfigError::Kind::Schema, path(key), "expected an integer");
    std::int64_t raw = v->is_number_unsigned() && v->get<std::uint64_t>() >
                                                      static_cast<std::uint64_t>(
                                                          std::numeric_limits<std::int64_t>::max())
                           ? std::numeric_limits<std::int64_t>::max()
                           : v->get<std::int64_t>();
    if (raw < std::numeric_limits<T>::min() || raw > std::numeric_limits<T>::max())
      throw ConfigError(ConfigError::Kind::Schema, path(key), "integer out of range");
    out = static_cast<T>(raw);
  }

  void number(const std::string& key, double& out) {
    const json* v = find(key, false);
    if (!v) return;
    if (!v->is_number()) throw ConfigError(ConfigError::Kind::Schema, path(key), "expected a number");
    out = v->get<double>();
  }

  void coord(const std::string& key, Coord& out) {
    const json* v = find(key, false);
    if (!v) return;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number_integer() ||
        !(*v)[1].is_number_integer())
      throw ConfigError(ConfigError::Kind::Schema, path(key), "expected [x, y] integers");
    std::int64_t x = (*v)[0].get<std::int64_t>();
    std::int64_t y = (*v)[1].get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max() ||
        y < std::numeric_limits<int>::min() || y > std::numeric_limits<int>::max())
      throw ConfigError(ConfigError::Kind::Schema, path(key), "integer out of range");
    out = {static_cast<int>(x), static_cast<int>(y)};
  }

 private:
  std::string path(const std::string& key) const { return name_ + "." + key; }

  const json* find(const std::string& key, bool required) const {
    if (obj_) {
      auto it = obj_->find(key);
      if (it != obj_->end()) return &*it;
    }
    if (required) throw ConfigError(ConfigError::Kind::Schema, path(key), "missing required field");
    return nullptr;
  }

  std::string name_;
  const json* obj_ = nullptr;
};

void require_at_least(std::vector<Violation>& out, const std::string& path, std::int64_t value,
                      std::int64_t bound) {
  if (value < bound)
    out.push_back({path, "must be >= " + std::to_string(bound) + " (got " + std::to_string(value) + ")"});
}

void require_non_negative(std::vector<Violation>& out, const std::string& path, double value) {
  if (!(value >= 0.0)) {
    std::ostringstream os;
    os << "must be >= 0 (got " << value << ")";
    out.push_back({path, os.str()});
  }
}

}  // namespace

ArchConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigError::Kind::Syntax, "", e.what());
  }
  if (!root.is_object()) throw ConfigError(ConfigError::Kind::Schema, "", "top level must be an object");
  static const std::set<std::string> kTop = {"mesh", "core", "timing", "energy", "system"};
  for (const auto& [key, _] : root.items()) {
    if (!kTop.count(key)) throw ConfigError(ConfigError::Kind::Schema, key, "unknown section");
  }

  ArchConfig cfg;

  Section mesh(root, "mesh", {"width", "height", "global_mem_node"}, true);
  mesh.integer("width", cfg.mesh_width, true);
  mesh.integer("height", cfg.mesh_height, true);
  mesh.coord("global_mem_node", cfg.global_mem_node);

  Section core(root, "core",
               {"xbars_per_core", "xbar_rows", "xbar_cols", "adcs_per_xbar", "local_mem_bytes",
                "rob_size", "dispatch_width", "num_scalar_regs"},
               true);
  core.integer("xbars_per_core", cfg.xbars_per_core, true);
  core.integer("xbar_rows", cfg.xbar_rows, true);
  core.integer("xbar_cols", cfg.xbar_cols, true);
  core.integer("adcs_per_xbar", cfg.adcs_per_xbar);
  core.integer("local_mem_bytes", cfg.local_mem_bytes);
  core.integer("rob_size", cfg.rob_size);
  core.integer("dispatch_width", cfg.dispatch_width);
  core.integer("num_scalar_regs", cfg.num_scalar_regs);

  TimingParams& t = cfg.timing;
  Section timing(root, "timing",
                 {"mvm_setup_cycles", "adc_cycles_per_sample", "vec_setup_cycles",
                  "vec_elems_per_cycle", "transfer_base_cycles", "noc_cycles_per_hop",
                  "link_bytes_per_cycle", "gmem_base_cycles", "gmem_bytes_per_cycle",
                  "scalar_cycles"},
                 false);
  timing.integer("mvm_setup_cycles", t.mvm_setup_cycles);
  timing.integer("adc_cycles_per_sample", t.adc_cycles_per_sample);
  timing.integer("vec_setup_cycles", t.vec_setup_cycles);
  timing.integer("vec_elems_per_cycle", t.vec_elems_per_cycle);
  timing.integer("transfer_base_cycles", t.transfer_base_cycles);
  timing.integer("noc_cycles_per_hop", t.noc_cycles_per_hop);
  timing.integer("link_bytes_per_cycle", t.link_bytes_per_cycle);
  timing.integer("gmem_base_cycles", t.gmem_base_cycles);
  timing.integer("gmem_bytes_per_cycle", t.gmem_bytes_per_cycle);
  timing.integer("scalar_cycles", t.scalar_cycles);

  EnergyParams& e = cfg.energy;
  Section energy(root, "energy",
                 {"mvm_energy_per_xbar_pj", "adc_energy_per_sample_pj", "vec_energy_per_elem_pj",
                  "noc_energy_per_byte_hop_pj", "mem_energy_per_byte_pj",
                  "scalar_energy_per_inst_pj", "static_power_mw_per_core"},
                 false);
  energy.number("mvm_energy_per_xbar_pj", e.mvm_energy_per_xbar_pj);
  energy.number("adc_energy_per_sample_pj", e.adc_energy_per_sample_pj);
  energy.number("vec_energy_per_elem_pj", e.vec_energy_per_elem_pj);
  energy.number("noc_energy_per_byte_hop_pj", e.noc_energy_per_byte_hop_pj);
  energy.number("mem_energy_per_byte_pj", e.mem_energy_per_byte_pj);
  energy.number("scalar_energy_per_inst_pj", e.scalar_energy_per_inst_pj);
  energy.number("static_power_mw_per_core", e.static_power_mw_per_core);

  Section system(root, "system", {"frequency_hz", "watchdog_cycles", "gmem_bytes"}, false);
  system.integer("frequency_hz", cfg.frequency_hz);
  system.integer("watchdog_cycles", cfg.watchdog_cycles);
  system.integer("gmem_bytes", cfg.gmem_bytes);

  auto violations = validate_config(cfg);
  if (!violations.empty()) {
    std::string msg = violations.front().message;
    if (violations.size() > 1) msg += " (+" + std::to_string(violations.size() - 1) + " more)";
    throw ConfigError(ConfigError::Kind::Semantic, violations.front().where, msg);
  }
  return cfg;
}

ArchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ArchConfig& cfg) {
  const TimingParams& t = cfg.timing;
  const EnergyParams& e = cfg.energy;
  json root = {
      {"mesh",
       {{"width", cfg.mesh_width},
        {"height", cfg.mesh_height},
        {"global_mem_node", {cfg.global_mem_node.x, cfg.global_mem_node.y}}}},
      {"core",
       {{"xbars_per_core", cfg.xbars_per_core},
        {"xbar_rows", cfg.xbar_rows},
        {"xbar_cols", cfg.xbar_cols},
        {"adcs_per_xbar", cfg.adcs_per_xbar},
        {"local_mem_bytes", cfg.local_mem_bytes},
        {"rob_size", cfg.rob_size},
        {"dispatch_width", cfg.dispatch_width},
        {"num_scalar_regs", cfg.num_scalar_regs}}},
      {"timing",
       {{"mvm_setup_cycles", t.mvm_setup_cycles},
        {"adc_cycles_per_sample", t.adc_cycles_per_sample},
        {"vec_setup_cycles", t.vec_setup_cycles},
        {"vec_elems_per_cycle", t.vec_elems_per_cycle},
        {"transfer_base_cycles", t.transfer_base_cycles},
        {"noc_cycles_per_hop", t.noc_cycles_per_hop},
        {"link_bytes_per_cycle", t.link_bytes_per_cycle},
        {"gmem_base_cycles", t.gmem_base_cycles},
        {"gmem_bytes_per_cycle", t.gmem_bytes_per_cycle},
        {"scalar_cycles", t.scalar_cycles}}},
      {"energy",
       {{"mvm_energy_per_xbar_pj", e.mvm_energy_per_xbar_pj},
        {"adc_energy_per_sample_pj", e.adc_energy_per_sample_pj},
        {"vec_energy_per_elem_pj", e.vec_energy_per_elem_pj},
        {"noc_energy_per_byte_hop_pj", e.noc_energy_per_byte_hop_pj},
        {"mem_energy_per_byte_pj", e.mem_energy_per_byte_pj},
        {"scalar_energy_per_inst_pj", e.scalar_energy_per_inst_pj},
        {"static_power_mw_per_core", e.static_power_mw_per_core}}},
      {"system",
       {{"frequency_hz", cfg.frequency_hz},
        {"watchdog_cycles", cfg.watchdog_cycles},
        {"gmem_bytes", cfg.gmem_bytes}}},
  };
  return root.dump(2) + "\n";
}

std::vector<Violation> validate_config(const ArchConfig& cfg) {
  std::vector<Violation> v;
  require_at_least(v, "mesh.width", cfg.mesh_width, 1);
  require_at_least(v, "mesh.height", cfg.mesh_height, 1);
  if (cfg.mesh_width >= 1 && cfg.mesh_height >= 1 && !cfg.contains(cfg.global_mem_node)) {
    v.push_back({"mesh.global_mem_node",
                 "(" + std::to_string(cfg.global_mem_node.x) + "," +
                     std::to_string(cfg.global_mem_node.y) + ") lies outside the " +
                     std::to_string(cfg.mesh_width) + "x" + std::to_string(cfg.mesh_height) + " mesh"});
  }

  require_at_least(v, "core.xbars_per_core", cfg.xbars_per_core, 1);
  require_at_least(v, "core.xbar_rows", cfg.xbar_rows, 1);
  require_at_least(v, "core.xbar_cols", cfg.xbar_cols, 1);
  require_at_least(v, "core.adcs_per_xbar", cfg.adcs_per_xbar, 1);
  if (cfg.adcs_per_xbar > cfg.xbar_cols && cfg.xbar_cols >= 1) {
    v.push_back({"core.adcs_per_xbar", "must not exceed xbar_cols (" +
                                           std::to_string(cfg.adcs_per_xbar) + " > " +
                                           std::to_string(cfg.xbar_cols) + ")"});
  }
  require_at_least(v, "core.local_mem_bytes", cfg.local_mem_bytes, 1);
  require_at_least(v, "core.rob_size", cfg.rob_size, 1);
  require_at_least(v, "core.dispatch_width", cfg.dispatch_width, 1);
  require_at_least(v, "core.num_scalar_regs", cfg.num_scalar_regs, 1);

  const TimingParams& t = cfg.timing;
  require_at_least(v, "timing.mvm_setup_cycles", t.mvm_setup_cycles, 0);
  require_at_least(v, "timing.adc_cycles_per_sample", t.adc_cycles_per_sample, 1);
  require_at_least(v, "timing.vec_setup_cycles", t.vec_setup_cycles, 0);
  require_at_least(v, "timing.vec_elems_per_cycle", t.vec_elems_per_cycle, 1);
  require_at_least(v, "timing.transfer_base_cycles", t.transfer_base_cycles, 0);
  require_at_least(v, "timing.noc_cycles_per_hop", t.noc_cycles_per_hop, 1);
  require_at_least(v, "timing.link_bytes_per_cycle", t.link_bytes_per_cycle, 1);
  require_at_least(v, "timing.gmem_base_cycles", t.gmem_base_cycles, 0);
  require_at_least(v, "timing.gmem_bytes_per_cycle", t.gmem_bytes_per_cycle, 1);
  require_at_least(v, "timing.scalar_cycles", t.scalar_cycles, 1);

  const EnergyParams& e = cfg.energy;
  require_non_negative(v, "energy.mvm_energy_per_xbar_pj", e.mvm_energy_per_xbar_pj);
  require_non_negative(v, "energy.adc_energy_per_sample_pj", e.adc_energy_per_sample_pj);
  require_non_negative(v, "energy.vec_energy_per_elem_pj", e.vec_energy_per_elem_pj);
  require_non_negative(v, "energy.noc_energy_per_byte_hop_pj", e.noc_energy_per_byte_hop_pj);
  require_non_negative(v, "energy.mem_energy_per_byte_pj", e.mem_energy_per_byte_pj);
  require_non_negative(v, "energy.scalar_energy_per_inst_pj", e.scalar_energy_per_inst_pj);
  require_non_negative(v, "energy.static_power_mw_per_core", e.static_power_mw_per_core);

  require_at_least(v, "system.frequency_hz", cfg.frequency_hz, 1);
  require_at_least(v, "system.watchdog_cycles", cfg.watchdog_cycles, 1);
  require_at_least(v, "system.gmem_bytes", cfg.gmem_bytes, 1);
  return v;
}

}  // namespace pimsim
