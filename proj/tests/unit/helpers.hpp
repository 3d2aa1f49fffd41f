#pragma once

#include <filesystem>
#include <string>

#include "pimsim/arch_config.hpp"
#include "pimsim/nn_ir.hpp"

namespace test {

inline std::filesystem::path source_dir() { return PIMSIM_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& rel) { return source_dir() / "fixtures" / rel; }

inline pimsim::Network fixture_net(const std::string& name) {
  return pimsim::load_network(fixture("networks/" + name + ".json"));
}

inline pimsim::ArchConfig desk() { return pimsim::load_config(fixture("configs/desk.json")); }

inline pimsim::ArchConfig small_cfg(int w, int h, int xbars, int rows, int cols) {
  pimsim::ArchConfig c;
  c.mesh_width = w;
  c.mesh_height = h;
  c.xbars_per_core = xbars;
  c.xbar_rows = rows;
  c.xbar_cols = cols;
  c.local_mem_bytes = 64 * 1024;
  return c;
}

}  // namespace test
