#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pimsim/arch_config.hpp"

namespace pimsim {

/// E = +x, N = +y.
enum class Dir { E = 0, W = 1, N = 2, S = 3 };
char dir_char(Dir d);

/// Directed link leaving `from` in direction `dir`.
struct Link {
  Coord from;
  Dir dir = Dir::E;
  friend bool operator==(const Link&, const Link&) = default;
};

/// X-first, then Y. Empty when src == dst.
std::vector<Link> route_xy(Coord src, Coord dst);

enum class TransferKind { SendRecv, Load, Store };

std::int64_t transfer_cycles(const ArchConfig& cfg, TransferKind kind, std::int64_t bytes, int hops);

/// Busy-until bookkeeping for every directed link plus the global-memory port.
class Mesh {
 public:
  explicit Mesh(const ArchConfig& cfg);

  /// Earliest cycle >= ready at which all links (and the port, if used) are free.
  std::int64_t earliest_start(const std::vector<Link>& route, bool uses_gmem_port, std::int64_t ready) const;
  void occupy(const std::vector<Link>& route, bool uses_gmem_port, std::int64_t until);
  std::int64_t busy_until(const Link& l) const { return busy_[index(l)]; }

 private:
  std::size_t index(const Link& l) const;
  int width_;
  std::vector<std::int64_t> busy_;
  std::int64_t gmem_port_ = 0;
};

}  // namespace pimsim
