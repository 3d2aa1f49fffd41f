#include <algorithm>
#include <map>

#include "pimsim/compiler.hpp"

namespace pimsim {

namespace {

std::size_t total_tiles(std::span<const Tiling> tilings) {
  std::size_t n = 0;
  for (const auto& t : tilings) n += t.tiles.size();
  return n;
}

Placement empty_placement(const ArchConfig& cfg) {
  Placement p;
  p.num_cores = cfg.num_cores();
  p.xbars_per_core = cfg.xbars_per_core;
  return p;
}

}  // namespace

std::vector<int> Placement::used_per_core() const {
  std::vector<int> used(static_cast<std::size_t>(num_cores), 0);
  for (const auto& s : slots) ++used[static_cast<std::size_t>(s.core)];
  return used;
}

std::set<int> Placement::layers_on_core(int core) const {
  std::set<int> out;
  for (const auto& s : slots)
    if (s.core == core) out.insert(s.layer_id);
  return out;
}

Placement map_utilization_first(std::span<const Tiling> tilings, const ArchConfig& cfg) {
  Placement p = empty_placement(cfg);
  const std::size_t capacity = static_cast<std::size_t>(cfg.num_cores()) * cfg.xbars_per_core;
  const std::size_t need = total_tiles(tilings);
  if (need > capacity)
    throw CompileError(CompileError::Kind::CapacityExceeded,
                       std::to_string(need) + " tiles, chip has " + std::to_string(capacity) + " crossbars");
  int core = 0, xbar = 0;
  for (const auto& t : tilings) {
    for (const auto& tile : t.tiles) {
      if (xbar == cfg.xbars_per_core) {
        ++core;
        xbar = 0;
      }
      p.slots.push_back({t.layer_id, tile.row_block, tile.col_block, core, xbar++});
    }
  }
  return p;
}

Placement map_performance_first(std::span<const Tiling> tilings, const ArchConfig& cfg) {
  Placement p = empty_placement(cfg);
  int needed = 0;
  for (const auto& t : tilings)
    needed += (static_cast<int>(t.tiles.size()) + cfg.xbars_per_core - 1) / cfg.xbars_per_core;
  if (needed > cfg.num_cores())
    throw CompileError(CompileError::Kind::CapacityExceeded,
                       "performance-first mapping needs " + std::to_string(needed) + " cores, mesh has " +
                           std::to_string(cfg.num_cores()));
  int next_core = 0;
  for (const auto& t : tilings) {
    int core = next_core, xbar = 0;
    for (const auto& tile : t.tiles) {
      if (xbar == cfg.xbars_per_core) {
        ++core;
        xbar = 0;
      }
      p.slots.push_back({t.layer_id, tile.row_block, tile.col_block, core, xbar++});
    }
    if (!t.tiles.empty()) next_core = core + 1;
  }
  return p;
}

Placement map_tiles(std::span<const Tiling> tilings, const ArchConfig& cfg, Strategy s) {
  return s == Strategy::UtilizationFirst ? map_utilization_first(tilings, cfg)
                                         : map_performance_first(tilings, cfg);
}

std::vector<Violation> check_placement(const Placement& p, std::span<const Tiling> tilings, Strategy s) {
  std::vector<Violation> out;
  auto bad = [&](std::string where, std::string msg) {
    out.push_back({std::move(where), std::move(msg), Violation::Kind::Structural});
  };

  std::map<std::tuple<int, int, int>, int> placed;  // (layer, rb, cb) -> count
  std::map<std::pair<int, int>, int> xbar_use;
  for (const auto& sl : p.slots) {
    std::string where = "layer " + std::to_string(sl.layer_id) + " tile (" + std::to_string(sl.row_block) + "," +
                        std::to_string(sl.col_block) + ")";
    if (sl.core < 0 || sl.core >= p.num_cores) bad(where, "core outside the mesh");
    if (sl.xbar < 0 || sl.xbar >= p.xbars_per_core) bad(where, "xbar outside [0, xbars_per_core)");
    if (++xbar_use[{sl.core, sl.xbar}] > 1)
      bad(where, "crossbar " + std::to_string(sl.xbar) + " on core " + std::to_string(sl.core) + " hosts two tiles");
    ++placed[{sl.layer_id, sl.row_block, sl.col_block}];
  }
  std::size_t expected = 0;
  for (const auto& t : tilings) {
    for (const auto& tile : t.tiles) {
      ++expected;
      auto it = placed.find({t.layer_id, tile.row_block, tile.col_block});
      if (it == placed.end() || it->second != 1)
        bad("layer " + std::to_string(t.layer_id), "tile (" + std::to_string(tile.row_block) + "," +
                                                       std::to_string(tile.col_block) + ") not placed exactly once");
    }
  }
  if (p.slots.size() != expected) bad("placement", "slot count differs from tile count");

  auto used = p.used_per_core();
  for (int c = 0; c < p.num_cores; ++c)
    if (used[static_cast<std::size_t>(c)] > p.xbars_per_core)
      bad("core " + std::to_string(c), "more tiles than crossbars");

  if (s == Strategy::PerformanceFirst) {
    for (int c = 0; c < p.num_cores; ++c)
      if (p.layers_on_core(c).size() > 1) bad("core " + std::to_string(c), "hosts tiles of more than one layer");
  } else {
    int last = -1;
    for (int c = 0; c < p.num_cores; ++c)
      if (used[static_cast<std::size_t>(c)] > 0) last = c;
    for (int c = 0; c < last; ++c)
      if (used[static_cast<std::size_t>(c)] != p.xbars_per_core)
        bad("core " + std::to_string(c), "not full although a later core is used");
  }
  return out;
}

}  // namespace pimsim
