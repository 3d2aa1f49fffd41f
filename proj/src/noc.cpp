#include "pimsim/noc.hpp"

#include <algorithm>

namespace pimsim {

char dir_char(Dir d) {
  switch (d) {
    case Dir::E: return 'E';
    case Dir::W: return 'W';
    case Dir::N: return 'N';
    case Dir::S: return 'S';
  }
  return '?';
}

std::vector<Link> route_xy(Coord src, Coord dst) {
  std::vector<Link> out;
  Coord at = src;
  while (at.x != dst.x) {
    Dir d = dst.x > at.x ? Dir::E : Dir::W;
    out.push_back({at, d});
    at.x += d == Dir::E ? 1 : -1;
  }
  while (at.y != dst.y) {
    Dir d = dst.y > at.y ? Dir::N : Dir::S;
    out.push_back({at, d});
    at.y += d == Dir::N ? 1 : -1;
  }
  return out;
}

std::int64_t transfer_cycles(const ArchConfig& cfg, TransferKind kind, std::int64_t bytes, int hops) {
  const auto& t = cfg.timing;
  auto ceil_div = [](std::int64_t a, std::int64_t b) { return (a + b - 1) / b; };
  std::int64_t cycles = t.transfer_base_cycles + hops * t.noc_cycles_per_hop + ceil_div(bytes, t.link_bytes_per_cycle);
  if (kind != TransferKind::SendRecv) cycles += t.gmem_base_cycles + ceil_div(bytes, t.gmem_bytes_per_cycle);
  return cycles;
}

Mesh::Mesh(const ArchConfig& cfg)
    : width_(cfg.mesh_width), busy_(static_cast<std::size_t>(cfg.num_cores()) * 4, 0) {}

std::size_t Mesh::index(const Link& l) const {
  return (static_cast<std::size_t>(l.from.y) * width_ + l.from.x) * 4 + static_cast<std::size_t>(l.dir);
}

std::int64_t Mesh::earliest_start(const std::vector<Link>& route, bool uses_gmem_port, std::int64_t ready) const {
  std::int64_t start = ready;
  for (const auto& l : route) start = std::max(start, busy_[index(l)]);
  if (uses_gmem_port) start = std::max(start, gmem_port_);
  return start;
}

void Mesh::occupy(const std::vector<Link>& route, bool uses_gmem_port, std::int64_t until) {
  for (const auto& l : route) busy_[index(l)] = until;
  if (uses_gmem_port) gmem_port_ = until;
}

}  // namespace pimsim
