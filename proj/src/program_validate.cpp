#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <tuple>

#include "pimsim/isa.hpp"

namespace pimsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using TransferKey = std::tuple<int, int, int>;  // (sender, receiver, tag)

struct TransferSide {
  int count = 0;
  Len len = 0;
};

std::string at_inst(int core, std::size_t index) {
  return "core " + std::to_string(core) + ", inst " + std::to_string(index);
}

}  // namespace

std::vector<Violation> validate_program(const Program& program, const ArchConfig& cfg) {
  std::vector<Violation> out;
  auto structural = [&](std::string where, std::string msg) {
    out.push_back({std::move(where), std::move(msg), Violation::Kind::Structural});
  };
  auto protocol = [&](std::string where, std::string msg) {
    out.push_back({std::move(where), std::move(msg), Violation::Kind::Protocol});
  };
  const int cores = cfg.num_cores();
  const Addr mem = cfg.local_mem_bytes;

  std::map<TransferKey, TransferSide> sends, recvs;
  bool any_branches = false;

  for (const auto& [core_id, core] : program.cores) {
    std::string where_core = "core " + std::to_string(core_id);
    if (core_id < 0 || core_id >= cores) {
      structural(where_core, "core id outside the " + std::to_string(cores) + "-core mesh");
      continue;
    }
    if (core.code.empty() || !std::holds_alternative<inst::Halt>(core.code.back()))
      structural(where_core, "instruction stream must end with HALT");
    if (core.layer_tags.size() != core.code.size())
      structural(where_core, "layer annotations do not match the instruction count");

    std::set<int> group_ids;
    for (const auto& g : core.groups) {
      std::string where = where_core + ", group " + std::to_string(g.id);
      if (!group_ids.insert(g.id).second) structural(where, "duplicate group_id");
      if (g.input_len < 1 || g.input_len > cfg.xbar_rows)
        structural(where, "input_len " + std::to_string(g.input_len) + " outside [1, xbar_rows]");
      if (g.members.empty()) structural(where, "group has no members");
      std::set<int> xbars;
      std::vector<Interval> outs;
      for (const auto& m : g.members) {
        if (m.xbar < 0 || m.xbar >= cfg.xbars_per_core)
          structural(where, "xbar " + std::to_string(m.xbar) + " outside [0, xbars_per_core)");
        if (!xbars.insert(m.xbar).second) structural(where, "xbar " + std::to_string(m.xbar) + " listed twice");
        if (m.out_len < 1 || m.out_len > cfg.xbar_cols)
          structural(where, "out_len " + std::to_string(m.out_len) + " outside [1, xbar_cols]");
        if (m.out_offset < 0) structural(where, "negative out_offset");
        Interval iv{m.out_offset, m.out_offset + Len{m.out_len} * 4};
        for (const auto& o : outs)
          if (o.overlaps(iv)) structural(where, "member output ranges overlap");
        outs.push_back(iv);
      }
    }

    for (const auto& [xbar, img] : core.weights) {
      std::string where = where_core + ", weights xbar " + std::to_string(xbar);
      if (xbar < 0 || xbar >= cfg.xbars_per_core) structural(where, "xbar outside [0, xbars_per_core)");
      if (!img.seed && img.data.size() != static_cast<std::size_t>(cfg.xbar_rows) * cfg.xbar_cols)
        structural(where, "weight image has " + std::to_string(img.data.size()) + " bytes, expected " +
                              std::to_string(std::int64_t{cfg.xbar_rows} * cfg.xbar_cols));
    }

    const auto n = static_cast<int>(core.code.size());
    for (std::size_t k = 0; k < core.code.size(); ++k) {
      const Instruction& ins = core.code[k];
      std::string where = at_inst(core_id, k);
      auto need_len = [&](Len len) {
        if (len < 1) structural(where, "len must be >= 1");
      };
      auto need_reg = [&](int r) {
        if (r < 0 || r >= cfg.num_scalar_regs) structural(where, "register r" + std::to_string(r) + " out of range");
      };
      auto need_peer = [&](int peer) {
        if (peer < 0 || peer >= cores) structural(where, "peer core " + std::to_string(peer) + " outside the mesh");
        else if (peer == core_id) structural(where, "transfer to the issuing core itself");
      };
      auto need_target = [&](int t) {
        if (t < 0 || t >= n) structural(where, "branch target " + std::to_string(t) + " out of range");
      };
      auto need_gmem = [&](Addr g, Len len) {
        if (g < 0 || g + len > cfg.gmem_bytes) structural(where, "global address range outside gmem_bytes");
      };

      const GroupEntry* group = nullptr;
      bool ok = true;
      std::visit(Overloaded{
                     [&](const inst::Mvm& i) {
                       group = core.find_group(i.group);
                       if (!group) {
                         structural(where, "MVM references undefined group g" + std::to_string(i.group));
                         ok = false;
                       }
                     },
                     [&](const inst::VAdd& i) { need_len(i.len); },
                     [&](const inst::VMax& i) { need_len(i.len); },
                     [&](const inst::VRelu& i) { need_len(i.len); },
                     [&](const inst::VCopy& i) {
                       need_len(i.len);
                       if (i.src_stride < 1) structural(where, "VCOPY stride must be >= 1");
                     },
                     [&](const inst::VScale& i) {
                       need_len(i.len);
                       if (i.multiplier < 0) structural(where, "VSCALE multiplier must be >= 0");
                       if (i.shift < 0 || i.shift > 31) structural(where, "VSCALE shift outside [0, 31]");
                     },
                     [&](const inst::Send& i) {
                       need_len(i.len);
                       need_peer(i.dst_core);
                       auto& s = sends[{core_id, i.dst_core, i.tag}];
                       ++s.count;
                       s.len = i.len;
                     },
                     [&](const inst::Recv& i) {
                       need_len(i.len);
                       need_peer(i.src_core);
                       auto& r = recvs[{i.src_core, core_id, i.tag}];
                       ++r.count;
                       r.len = i.len;
                     },
                     [&](const inst::Load& i) {
                       need_len(i.len);
                       need_gmem(i.gaddr, i.len);
                     },
                     [&](const inst::Store& i) {
                       need_len(i.len);
                       need_gmem(i.gaddr, i.len);
                     },
                     [&](const inst::Li& i) { need_reg(i.reg); },
                     [&](const inst::SArith& i) {
                       need_reg(i.rd);
                       need_reg(i.ra);
                       need_reg(i.rb);
                     },
                     [&](const inst::Bne& i) {
                       need_reg(i.ra);
                       need_reg(i.rb);
                       need_target(i.target);
                       any_branches = true;
                     },
                     [&](const inst::Jmp& i) {
                       need_target(i.target);
                       any_branches = true;
                     },
                     [](const inst::Nop&) {},
                     [](const inst::Halt&) {},
                 },
                 ins);
      if (!ok) continue;
      Footprint fp = footprint_of(ins, group);
      auto check = [&](const Interval& iv) {
        if (iv.lo < 0 || iv.hi > mem || iv.hi <= iv.lo)
          structural(where, "local address range [" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) +
                                ") outside local memory of " + std::to_string(mem) + " bytes");
      };
      for (const auto& iv : fp.mem_reads) check(iv);
      for (const auto& iv : fp.mem_writes) check(iv);
    }
  }

  auto key_str = [](const TransferKey& k) {
    return "transfer " + std::to_string(std::get<0>(k)) + "->" + std::to_string(std::get<1>(k)) + " tag " +
           std::to_string(std::get<2>(k));
  };
  bool matched = true;
  for (const auto& [key, s] : sends) {
    auto it = recvs.find(key);
    if (s.count > 1) protocol(key_str(key), "tag used by " + std::to_string(s.count) + " SENDs");
    if (it == recvs.end()) {
      protocol(key_str(key), "SEND has no matching RECV");
      matched = false;
    } else if (it->second.len != s.len) {
      protocol(key_str(key), "SEND/RECV lengths differ");
    }
  }
  for (const auto& [key, r] : recvs) {
    if (r.count > 1) protocol(key_str(key), "tag used by " + std::to_string(r.count) + " RECVs");
    if (!sends.count(key)) {
      protocol(key_str(key), "RECV has no matching SEND");
      matched = false;
    }
  }

  // With straight-line code, rendezvous is deadlock-free iff the per-core transfer
  // orders are consistent with one global order (the pair graph is acyclic).
  if (matched && out.empty() && !any_branches) {
    std::map<TransferKey, int> node;
    for (const auto& [key, _] : sends) node.emplace(key, static_cast<int>(node.size()));
    std::vector<std::vector<int>> edges(node.size());
    std::vector<int> indeg(node.size(), 0);
    for (const auto& [core_id, core] : program.cores) {
      int prev = -1;
      for (const auto& ins : core.code) {
        int cur = -1;
        if (auto* s = std::get_if<inst::Send>(&ins)) cur = node.at({core_id, s->dst_core, s->tag});
        else if (auto* r = std::get_if<inst::Recv>(&ins)) cur = node.at({r->src_core, core_id, r->tag});
        if (cur < 0) continue;
        if (prev >= 0) {
          edges[static_cast<std::size_t>(prev)].push_back(cur);
          ++indeg[static_cast<std::size_t>(cur)];
        }
        prev = cur;
      }
    }
    std::queue<int> ready;
    for (std::size_t i = 0; i < indeg.size(); ++i)
      if (indeg[i] == 0) ready.push(static_cast<int>(i));
    std::size_t seen = 0;
    while (!ready.empty()) {
      int v = ready.front();
      ready.pop();
      ++seen;
      for (int w : edges[static_cast<std::size_t>(v)])
        if (--indeg[static_cast<std::size_t>(w)] == 0) ready.push(w);
    }
    if (seen != node.size())
      protocol("transfers", "SEND/RECV orders across cores form a cycle (rendezvous deadlock)");
  }
  return out;
}

}  // namespace pimsim
