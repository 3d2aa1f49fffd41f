#include "pimsim/compiler.hpp"

namespace pimsim {

const Region& AddressMap::at(std::string_view name) const {
  for (const auto& r : regions)
    if (r.name == name) return r;
  throw Error("core " + std::to_string(core) + " has no buffer '" + std::string(name) + "'");
}

std::vector<AddressMap> allocate_memory(const std::vector<std::vector<BufferRequest>>& per_core,
                                        const ArchConfig& cfg) {
  std::vector<AddressMap> out;
  out.reserve(per_core.size());
  for (std::size_t c = 0; c < per_core.size(); ++c) {
    AddressMap map;
    map.core = static_cast<int>(c);
    Addr next = 0;
    for (const auto& req : per_core[c]) {
      if (req.bytes < 1) throw Error("buffer '" + req.name + "' has non-positive size");
      const Len align = req.align < 1 ? 1 : req.align;
      next = (next + align - 1) / align * align;
      map.regions.push_back({req.name, next, req.bytes});
      next += req.bytes;
    }
    map.used = next;
    if (next > cfg.local_mem_bytes)
      throw CompileError(CompileError::Kind::LocalMemoryOverflow,
                         "core " + std::to_string(c) + " requires " + std::to_string(next) + " bytes, " +
                             std::to_string(cfg.local_mem_bytes) + " available");
    out.push_back(std::move(map));
  }
  return out;
}

}  // namespace pimsim
