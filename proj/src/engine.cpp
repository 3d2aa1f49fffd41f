#include "pimsim/engine.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "pimsim/nn_ir.hpp"

namespace pimsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr Cycle kNever = std::numeric_limits<Cycle>::max();

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

struct Entry {
  int index = 0;
  const Instruction* ins = nullptr;
  InstClass cls = InstClass::Scalar;
  Footprint fp;
  const GroupEntry* group = nullptr;
  bool dispatched = false;
  Cycle complete = kNever;
  std::size_t record = 0;

  bool done(Cycle t) const { return complete <= t; }
};

struct CoreState {
  int id = 0;
  const CoreProgram* prog = nullptr;
  int pc = 0;
  bool fetch_done = false;
  bool halted = false;
  Cycle halt_at = 0;
  std::deque<Entry> rob;
  std::vector<std::uint8_t> mem;
  std::vector<std::int64_t> regs;
  Cycle vec_busy = 0;
  Cycle scalar_busy = 0;
  Cycle xfer_busy = 0;
  std::map<int, Cycle> group_busy;
  std::map<int, std::vector<std::int8_t>> xbars;
};

using RendezvousKey = std::tuple<int, int, int>;  // (sender, receiver, tag)

struct Side {
  CoreState* core = nullptr;
  Entry* entry = nullptr;
};

struct Pending {
  std::optional<Side> send;
  std::optional<Side> recv;
};

struct ReadyTransfer {
  TransferKind kind = TransferKind::SendRecv;
  int sender = 0;
  int receiver = 0;
  int tag = -1;
  Side a;  // SEND, or the issuing core for LOAD/STORE
  Side b;  // RECV
};

std::string with_suffix(const Instruction& ins) {
  std::string m(mnemonic(ins));
  if (auto* v = std::get_if<inst::VAdd>(&ins)) m += v->width == ElemWidth::Word ? ".w" : ".b";
  if (auto* v = std::get_if<inst::VMax>(&ins)) m += v->width == ElemWidth::Word ? ".w" : ".b";
  return m;
}

bool intersects(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  for (const auto& x : a)
    for (const auto& y : b)
      if (x.overlaps(y)) return true;
  return false;
}

bool intersects(const std::vector<int>& a, const std::vector<int>& b) {
  for (int x : a)
    for (int y : b)
      if (x == y) return true;
  return false;
}

class Engine {
 public:
  Engine(const Program& program, const ArchConfig& cfg, std::span<const std::uint8_t> gmem_init,
         const SimOptions& options)
      : program_(program), cfg_(cfg), options_(options), mesh_(cfg) {
    if (static_cast<std::int64_t>(gmem_init.size()) > cfg.gmem_bytes)
      throw Error("initial global memory image larger than gmem_bytes");
    result_.num_cores = cfg.num_cores();
    result_.gmem.assign(static_cast<std::size_t>(cfg.gmem_bytes), 0);
    std::copy(gmem_init.begin(), gmem_init.end(), result_.gmem.begin());
    cores_.resize(static_cast<std::size_t>(cfg.num_cores()));
    for (int c = 0; c < cfg.num_cores(); ++c) {
      CoreState& cs = cores_[static_cast<std::size_t>(c)];
      cs.id = c;
      auto it = program.cores.find(c);
      if (it == program.cores.end()) {
        cs.halted = true;
        continue;
      }
      cs.prog = &it->second;
      cs.mem.assign(static_cast<std::size_t>(cfg.local_mem_bytes), 0);
      cs.regs.assign(static_cast<std::size_t>(cfg.num_scalar_regs), 0);
      for (const auto& [xbar, img] : cs.prog->weights)
        cs.xbars[xbar] = materialize_weights(img, cfg.xbar_rows, cfg.xbar_cols);
    }
    for (const auto& [id, _] : program.cores)
      if (id < 0 || id >= cfg.num_cores()) throw Error("program uses core " + std::to_string(id) + " outside the mesh");
    intervals_.resize(cores_.size());
  }

  SimResult run() {
    Cycle t = 0;
    Cycle last_activity = 0;
    const Cycle watchdog = cfg_.watchdog_cycles;
    while (true) {
      bool active = false;
      for (auto& cs : cores_)
        if (!cs.halted) active |= step(cs, t);
      active |= arbitrate(t);
      if (active) last_activity = t;
      if (std::all_of(cores_.begin(), cores_.end(), [](const CoreState& c) { return c.halted; })) break;

      Cycle next = t + 1;
      if (!active && !options_.step_every_cycle) next = next_completion(t);
      if (next == kNever || next > last_activity + watchdog) {
        const Cycle detected = last_activity + watchdog;
        throw DeadlockError(detected, dump(detected, last_activity));
      }
      t = next;
    }
    finish();
    return std::move(result_);
  }

 private:
  // One cycle of one core: commit, fetch, dispatch. Returns whether anything changed.
  bool step(CoreState& cs, Cycle t) {
    bool active = false;
    while (!cs.rob.empty() && cs.rob.front().done(t)) {
      if (std::holds_alternative<inst::Halt>(*cs.rob.front().ins)) {
        cs.halted = true;
        cs.halt_at = t;
      }
      cs.rob.pop_front();
      active = true;
    }
    if (cs.halted) return true;

    const auto& code = cs.prog->code;
    bool branch_pending = std::any_of(cs.rob.begin(), cs.rob.end(),
                                      [&](const Entry& e) { return is_branch(*e.ins) && !e.done(t); });
    while (!cs.fetch_done && !branch_pending && static_cast<int>(cs.rob.size()) < cfg_.rob_size) {
      if (cs.pc < 0 || cs.pc >= static_cast<int>(code.size())) {
        cs.fetch_done = true;
        break;
      }
      Entry e;
      e.index = cs.pc;
      e.ins = &code[static_cast<std::size_t>(cs.pc)];
      e.cls = class_of(*e.ins);
      if (auto* m = std::get_if<inst::Mvm>(e.ins)) e.group = cs.prog->find_group(m->group);
      e.fp = footprint_of(*e.ins, e.group);
      cs.rob.push_back(std::move(e));
      ++cs.pc;
      active = true;
      const Instruction& ins = *cs.rob.back().ins;
      if (std::holds_alternative<inst::Halt>(ins)) cs.fetch_done = true;
      if (is_branch(ins)) branch_pending = true;
    }

    int issued = 0;
    for (std::size_t k = 0; k < cs.rob.size() && issued < cfg_.dispatch_width; ++k) {
      Entry& e = cs.rob[k];
      if (e.dispatched || !can_dispatch(cs, k, t)) continue;
      dispatch(cs, e, t);
      ++issued;
      active = true;
    }
    return active;
  }

  bool can_dispatch(const CoreState& cs, std::size_t k, Cycle t) const {
    const Entry& e = cs.rob[k];
    switch (e.cls) {
      case InstClass::Matrix: {
        if (!e.group) throw Error("core " + std::to_string(cs.id) + ": MVM references an undefined group");
        auto it = cs.group_busy.find(e.group->id);
        if (it != cs.group_busy.end() && it->second > t) return false;
        break;
      }
      case InstClass::Vector:
        if (cs.vec_busy > t) return false;
        break;
      case InstClass::Scalar:
        if (cs.scalar_busy > t) return false;
        break;
      case InstClass::Transfer:
        if (cs.xfer_busy > t) return false;
        break;
    }
    for (std::size_t j = 0; j < k; ++j) {
      const Entry& o = cs.rob[j];
      if (o.done(t)) continue;
      if (e.cls == InstClass::Transfer && o.cls == InstClass::Transfer && !o.dispatched) return false;
      if (intersects(e.fp.mem_reads, o.fp.mem_writes) || intersects(e.fp.mem_writes, o.fp.mem_writes) ||
          intersects(e.fp.mem_writes, o.fp.mem_reads))
        return false;
      if (intersects(e.fp.reg_reads, o.fp.reg_writes) || intersects(e.fp.reg_writes, o.fp.reg_writes) ||
          intersects(e.fp.reg_writes, o.fp.reg_reads))
        return false;
    }
    return true;
  }

  std::uint8_t* local(CoreState& cs, Addr a, Len len) {
    if (a < 0 || len < 0 || a + len > static_cast<Addr>(cs.mem.size()))
      throw Error("address fault on core " + std::to_string(cs.id) + ": [" + std::to_string(a) + ", " +
                  std::to_string(a + len) + ")");
    return cs.mem.data() + a;
  }

  std::uint8_t* global(Addr a, Len len) {
    if (a < 0 || len < 0 || a + len > static_cast<Addr>(result_.gmem.size()))
      throw Error("global address fault: [" + std::to_string(a) + ", " + std::to_string(a + len) + ")");
    return result_.gmem.data() + a;
  }

  static std::int32_t load32(const std::uint8_t* p) {
    std::uint32_t v = std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
                      std::uint32_t{p[3]} << 24;
    return static_cast<std::int32_t>(v);
  }

  static void store32(std::uint8_t* p, std::int32_t value) {
    auto v = static_cast<std::uint32_t>(value);
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
  }

  Cycle vector_cycles(Len len) const {
    return cfg_.timing.vec_setup_cycles + ceil_div(len, cfg_.timing.vec_elems_per_cycle);
  }

  void dispatch(CoreState& cs, Entry& e, Cycle t) {
    e.dispatched = true;
    e.record = result_.records.size();
    result_.records.push_back({cs.id, e.index, cs.prog->layer_tags[static_cast<std::size_t>(e.index)], e.cls,
                               with_suffix(*e.ins), t, kNever});
    auto finish_at = [&](Cycle c) {
      e.complete = c;
      result_.records[e.record].complete = c;
    };
    const auto& tm = cfg_.timing;
    std::visit(
        Overloaded{
            [&](const inst::Mvm& i) {
              const GroupEntry& g = *e.group;
              std::vector<std::int8_t> in(static_cast<std::size_t>(g.input_len));
              std::memcpy(in.data(), local(cs, i.src, g.input_len), in.size());
              Cycle dur = 0;
              for (const auto& m : g.members) {
                const auto& w = cs.xbars[m.xbar];
                if (w.empty()) throw Error("core " + std::to_string(cs.id) + ": crossbar " + std::to_string(m.xbar) +
                                           " has no weights");
                std::uint8_t* out = local(cs, i.dst + m.out_offset, Len{m.out_len} * 4);
                for (int j = 0; j < m.out_len; ++j) {
                  std::int32_t acc = 0;
                  for (int r = 0; r < g.input_len; ++r)
                    acc += std::int32_t{in[static_cast<std::size_t>(r)]} *
                           w[static_cast<std::size_t>(r) * cfg_.xbar_cols + j];
                  store32(out + 4 * j, acc);
                }
                dur = std::max(dur, tm.mvm_setup_cycles + ceil_div(m.out_len, cfg_.adcs_per_xbar) *
                                                              tm.adc_cycles_per_sample);
                result_.tally.xbar_activations += 1;
                result_.tally.adc_samples += m.out_len;
              }
              cs.group_busy[g.id] = t + dur;
              finish_at(t + dur);
            },
            [&](const inst::VAdd& i) {
              if (i.width == ElemWidth::Word) {
                const std::uint8_t* a = local(cs, i.src1, i.len * 4);
                const std::uint8_t* b = local(cs, i.src2, i.len * 4);
                std::vector<std::int32_t> r(static_cast<std::size_t>(i.len));
                for (Len k = 0; k < i.len; ++k) {
                  std::int64_t s = std::int64_t{load32(a + 4 * k)} + load32(b + 4 * k);
                  if (s < std::numeric_limits<std::int32_t>::min() || s > std::numeric_limits<std::int32_t>::max())
                    throw Error("VADD.w overflow on core " + std::to_string(cs.id) + ", inst " +
                                std::to_string(e.index));
                  r[static_cast<std::size_t>(k)] = static_cast<std::int32_t>(s);
                }
                std::uint8_t* d = local(cs, i.dst, i.len * 4);
                for (Len k = 0; k < i.len; ++k) store32(d + 4 * k, r[static_cast<std::size_t>(k)]);
              } else {
                const std::uint8_t* a = local(cs, i.src1, i.len);
                const std::uint8_t* b = local(cs, i.src2, i.len);
                std::vector<std::uint8_t> r(static_cast<std::size_t>(i.len));
                for (Len k = 0; k < i.len; ++k)
                  r[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(saturate_int8(
                      std::int64_t{static_cast<std::int8_t>(a[k])} + static_cast<std::int8_t>(b[k])));
                std::memcpy(local(cs, i.dst, i.len), r.data(), r.size());
              }
              result_.tally.vector_elems += i.len;
              finish_at(t + vector_cycles(i.len));
            },
            [&](const inst::VMax& i) {
              const Len w = static_cast<Len>(i.width);
              const std::uint8_t* a = local(cs, i.src1, i.len * w);
              const std::uint8_t* b = local(cs, i.src2, i.len * w);
              std::vector<std::uint8_t> r(static_cast<std::size_t>(i.len * w));
              for (Len k = 0; k < i.len; ++k) {
                if (i.width == ElemWidth::Word) {
                  store32(r.data() + 4 * k, std::max(load32(a + 4 * k), load32(b + 4 * k)));
                } else {
                  r[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(
                      std::max(static_cast<std::int8_t>(a[k]), static_cast<std::int8_t>(b[k])));
                }
              }
              std::memcpy(local(cs, i.dst, i.len * w), r.data(), r.size());
              result_.tally.vector_elems += i.len;
              finish_at(t + vector_cycles(i.len));
            },
            [&](const inst::VRelu& i) {
              const std::uint8_t* a = local(cs, i.src, i.len);
              std::vector<std::uint8_t> r(static_cast<std::size_t>(i.len));
              for (Len k = 0; k < i.len; ++k)
                r[static_cast<std::size_t>(k)] = static_cast<std::int8_t>(a[k]) < 0 ? 0 : a[k];
              std::memcpy(local(cs, i.dst, i.len), r.data(), r.size());
              result_.tally.vector_elems += i.len;
              finish_at(t + vector_cycles(i.len));
            },
            [&](const inst::VCopy& i) {
              const std::uint8_t* a = local(cs, i.src, (i.len - 1) * i.src_stride + 1);
              std::vector<std::uint8_t> r(static_cast<std::size_t>(i.len));
              for (Len k = 0; k < i.len; ++k) r[static_cast<std::size_t>(k)] = a[k * i.src_stride];
              std::memcpy(local(cs, i.dst, i.len), r.data(), r.size());
              result_.tally.mem_bytes += i.len;
              finish_at(t + vector_cycles(i.len));
            },
            [&](const inst::VScale& i) {
              const std::uint8_t* a = local(cs, i.src, i.len * 4);
              std::vector<std::uint8_t> r(static_cast<std::size_t>(i.len));
              for (Len k = 0; k < i.len; ++k)
                r[static_cast<std::size_t>(k)] =
                    static_cast<std::uint8_t>(requantize(load32(a + 4 * k), i.multiplier, i.shift));
              std::memcpy(local(cs, i.dst, i.len), r.data(), r.size());
              result_.tally.vector_elems += i.len;
              finish_at(t + vector_cycles(i.len));
            },
            [&](const inst::Send& i) {
              cs.xfer_busy = kNever;
              auto& p = rendezvous_[{cs.id, i.dst_core, i.tag}];
              p.send = Side{&cs, &e};
              if (p.recv) ready_.push_back({TransferKind::SendRecv, cs.id, i.dst_core, i.tag, *p.send, *p.recv});
            },
            [&](const inst::Recv& i) {
              cs.xfer_busy = kNever;
              auto& p = rendezvous_[{i.src_core, cs.id, i.tag}];
              p.recv = Side{&cs, &e};
              if (p.send) ready_.push_back({TransferKind::SendRecv, i.src_core, cs.id, i.tag, *p.send, *p.recv});
            },
            [&](const inst::Load&) {
              cs.xfer_busy = kNever;
              ready_.push_back({TransferKind::Load, cs.id, -1, -1, Side{&cs, &e}, {}});
            },
            [&](const inst::Store&) {
              cs.xfer_busy = kNever;
              ready_.push_back({TransferKind::Store, cs.id, -1, -1, Side{&cs, &e}, {}});
            },
            [&](const inst::Li& i) {
              cs.regs[static_cast<std::size_t>(i.reg)] = i.imm;
              scalar_done(cs, e, t);
            },
            [&](const inst::SArith& i) {
              auto a = static_cast<std::uint64_t>(cs.regs[static_cast<std::size_t>(i.ra)]);
              auto b = static_cast<std::uint64_t>(cs.regs[static_cast<std::size_t>(i.rb)]);
              std::uint64_t r = i.op == inst::ScalarOp::Add ? a + b : i.op == inst::ScalarOp::Sub ? a - b : a * b;
              cs.regs[static_cast<std::size_t>(i.rd)] = static_cast<std::int64_t>(r);
              scalar_done(cs, e, t);
            },
            [&](const inst::Bne& i) {
              if (cs.regs[static_cast<std::size_t>(i.ra)] != cs.regs[static_cast<std::size_t>(i.rb)]) {
                cs.pc = i.target;
                cs.fetch_done = false;
              }
              scalar_done(cs, e, t);
            },
            [&](const inst::Jmp& i) {
              cs.pc = i.target;
              scalar_done(cs, e, t);
            },
            [&](const inst::Nop&) { scalar_done(cs, e, t); },
            [&](const inst::Halt&) { scalar_done(cs, e, t); },
        },
        *e.ins);
  }

  void scalar_done(CoreState& cs, Entry& e, Cycle t) {
    const Cycle c = t + cfg_.timing.scalar_cycles;
    cs.scalar_busy = c;
    e.complete = c;
    result_.records[e.record].complete = c;
    result_.tally.scalar_insts += 1;
  }

  // Schedules every transfer that became ready this cycle, in arbitration order.
  bool arbitrate(Cycle t) {
    if (ready_.empty()) return false;
    std::sort(ready_.begin(), ready_.end(), [](const ReadyTransfer& x, const ReadyTransfer& y) {
      return std::tie(x.sender, x.receiver, x.tag) < std::tie(y.sender, y.receiver, y.tag);
    });
    const Coord gnode = cfg_.global_mem_node;
    for (const auto& r : ready_) {
      TransferRecord rec;
      rec.kind = r.kind;
      rec.ready = t;
      rec.tag = r.tag;
      rec.layer = result_.records[r.a.entry->record].layer;
      const Instruction& ins = *r.a.entry->ins;
      bool port = r.kind != TransferKind::SendRecv;
      if (r.kind == TransferKind::SendRecv) {
        const auto& s = std::get<inst::Send>(ins);
        const auto& v = std::get<inst::Recv>(*r.b.entry->ins);
        if (s.len != v.len)
          throw Error("transfer " + std::to_string(r.sender) + "->" + std::to_string(r.receiver) + " tag " +
                      std::to_string(r.tag) + ": SEND/RECV lengths differ");
        std::vector<std::uint8_t> data(static_cast<std::size_t>(s.len));
        std::memcpy(data.data(), local(*r.a.core, s.src, s.len), data.size());
        std::memcpy(local(*r.b.core, v.dst, v.len), data.data(), data.size());
        rec.src_core = r.sender;
        rec.dst_core = r.receiver;
        rec.bytes = s.len;
        rec.links = route_xy(cfg_.coord_of(r.sender), cfg_.coord_of(r.receiver));
      } else if (r.kind == TransferKind::Load) {
        const auto& l = std::get<inst::Load>(ins);
        std::memcpy(local(*r.a.core, l.dst, l.len), global(l.gaddr, l.len), static_cast<std::size_t>(l.len));
        rec.src_core = rec.dst_core = r.sender;
        rec.bytes = l.len;
        rec.links = route_xy(gnode, cfg_.coord_of(r.sender));
      } else {
        const auto& st = std::get<inst::Store>(ins);
        std::memcpy(global(st.gaddr, st.len), local(*r.a.core, st.src, st.len), static_cast<std::size_t>(st.len));
        rec.src_core = rec.dst_core = r.sender;
        rec.bytes = st.len;
        rec.links = route_xy(cfg_.coord_of(r.sender), gnode);
      }
      rec.hops = static_cast<int>(rec.links.size());
      rec.start = mesh_.earliest_start(rec.links, port, t);
      rec.complete = rec.start + transfer_cycles(cfg_, r.kind, rec.bytes, rec.hops);
      mesh_.occupy(rec.links, port, rec.complete);

      result_.tally.noc_byte_hops += rec.bytes * rec.hops;
      if (port) result_.tally.mem_bytes += rec.bytes;
      for (const Side* side : {&r.a, &r.b}) {
        if (!side->entry) continue;
        side->entry->complete = rec.complete;
        result_.records[side->entry->record].complete = rec.complete;
        side->core->xfer_busy = rec.complete;
      }
      if (r.kind == TransferKind::SendRecv) rendezvous_.erase({r.sender, r.receiver, r.tag});
      result_.transfers.push_back(std::move(rec));
    }
    ready_.clear();
    return true;
  }

  Cycle next_completion(Cycle t) const {
    Cycle best = kNever;
    for (const auto& cs : cores_)
      for (const auto& e : cs.rob)
        if (e.complete > t && e.complete < best) best = e.complete;
    return best;
  }

  std::string dump(Cycle detected, Cycle t) const {
    std::ostringstream os;
    os << "deadlock detected at cycle " << detected << ", last progress at cycle " << t << "\n";
    for (const auto& cs : cores_) {
      if (!cs.prog) continue;
      os << "core " << cs.id << ": pc=" << cs.pc << (cs.halted ? " halted" : "") << " rob=" << cs.rob.size() << "\n";
      for (const auto& e : cs.rob) {
        os << "  [" << e.index << "] " << with_suffix(*e.ins) << " ";
        if (!e.dispatched) os << "waiting";
        else if (e.complete == kNever) os << "blocked";
        else if (e.complete <= t) os << "done";
        else os << "executing until " << e.complete;
        os << "\n";
      }
    }
    os << "unmatched transfers:\n";
    for (const auto& [key, p] : rendezvous_) {
      auto [s, r, tag] = key;
      os << "  " << (p.send ? "SEND" : "RECV") << " " << s << "->" << r << " tag " << tag << " waiting for "
         << (p.send ? "RECV" : "SEND") << "\n";
    }
    return os.str();
  }

  void record_interval(int core, InstClass cls, Cycle a, Cycle b) {
    intervals_[static_cast<std::size_t>(core)][static_cast<std::size_t>(cls)].emplace_back(a, b);
  }

  void finish() {
    const std::size_t n = cores_.size();
    result_.halt_cycle.assign(n, 0);
    result_.busy_cycles.assign(n, PerClass{});
    result_.inst_counts.assign(n, PerClass{});
    for (const auto& cs : cores_) {
      result_.halt_cycle[static_cast<std::size_t>(cs.id)] = cs.halt_at;
      result_.total_cycles = std::max(result_.total_cycles, cs.halt_at);
    }
    for (const auto& r : result_.records) {
      ++result_.inst_counts[static_cast<std::size_t>(r.core)][static_cast<std::size_t>(r.cls)];
      record_interval(r.core, r.cls, r.issue, r.complete);
    }
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t k = 0; k < kNumInstClasses; ++k) {
        auto& iv = intervals_[c][k];
        std::sort(iv.begin(), iv.end());
        Cycle total = 0, lo = 0, hi = -1;
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
        result_.busy_cycles[c][k] = total;
      }
    }
  }

  const Program& program_;
  const ArchConfig& cfg_;
  SimOptions options_;
  Mesh mesh_;
  std::vector<CoreState> cores_;
  std::map<RendezvousKey, Pending> rendezvous_;
  std::vector<ReadyTransfer> ready_;
  std::vector<std::array<std::vector<std::pair<Cycle, Cycle>>, kNumInstClasses>> intervals_;
  SimResult result_;
};

std::string_view kind_label(TransferKind k) {
  switch (k) {
    case TransferKind::SendRecv: return "send-recv";
    case TransferKind::Load: return "load";
    case TransferKind::Store: return "store";
  }
  return "?";
}

}  // namespace

SimResult simulate(const Program& program, const ArchConfig& cfg, std::span<const std::uint8_t> gmem_init,
                   const SimOptions& options) {
  return Engine(program, cfg, gmem_init, options).run();
}

std::string trace_jsonl(const SimResult& sim) {
  using nlohmann::ordered_json;
  std::string out;
  for (const auto& r : sim.records) {
    ordered_json j;
    j["type"] = "inst";
    j["core"] = r.core;
    j["index"] = r.index;
    j["mnemonic"] = r.mnemonic;
    j["class"] = std::string(class_name(r.cls));
    j["layer"] = r.layer;
    j["issue"] = r.issue;
    j["complete"] = r.complete;
    out += j.dump() + "\n";
  }
  for (const auto& t : sim.transfers) {
    ordered_json j;
    j["type"] = "transfer";
    j["kind"] = std::string(kind_label(t.kind));
    j["src"] = t.src_core;
    j["dst"] = t.dst_core;
    j["tag"] = t.tag;
    j["bytes"] = t.bytes;
    j["layer"] = t.layer;
    j["ready"] = t.ready;
    j["start"] = t.start;
    j["complete"] = t.complete;
    ordered_json links = ordered_json::array();
    for (const auto& l : t.links)
      links.push_back("(" + std::to_string(l.from.x) + "," + std::to_string(l.from.y) + ")" + dir_char(l.dir));
    j["links"] = std::move(links);
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace pimsim
