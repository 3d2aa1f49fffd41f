#include <algorithm>
#include <map>
#include <optional>

#include <json.hpp>

#include "pimsim/compiler.hpp"

namespace pimsim {

namespace {

constexpr int kMaxMatrixRows = 1 << 15;

bool is_matrix(const Layer& l) {
  return l.has_weights() || (l.kind == LayerKind::Pool && l.pool == PoolKind::Avg);
}

/// Any matrix layer seen as a convolution over an HWC input.
struct Geometry {
  int c = 1, h = 1, w = 1;
  int kh = 1, kw = 1, stride = 1, pad = 0;
  int ho = 1, wo = 1, k = 1;
};

Geometry geometry_of(const Layer& l) {
  Geometry g;
  g.c = l.in_shape.c;
  g.h = l.in_shape.h;
  g.w = l.in_shape.w;
  if (l.kind == LayerKind::FC) {
    g.kh = g.h;
    g.kw = g.w;
  } else {
    g.kh = l.kernel_h;
    g.kw = l.kernel_w;
    g.stride = l.stride;
    g.pad = l.kind == LayerKind::Conv ? l.padding : 0;
  }
  g.ho = l.out_shape.h;
  g.wo = l.out_shape.w;
  g.k = l.out_shape.c;
  return g;
}

struct Group {
  int core = 0;
  int rb = 0;
  int local_id = 0;
  int rows_used = 0;
  int cb_lo = 0;
  int col_lo = 0;  // first output column held in the partial-sum buffer
  int span = 0;    // columns in the partial-sum buffer
  std::vector<std::pair<int, int>> members;  // (col_block, xbar)
  std::string psum, slice, recv;

  bool has_block(int cb) const {
    return std::any_of(members.begin(), members.end(), [&](const auto& m) { return m.first == cb; });
  }
};

struct Run {
  int col_lo = 0;
  int len = 0;
  std::vector<int> sources;  // indices into MatrixLayer::groups
};

struct MatrixLayer {
  Geometry g;
  QuantParams quant;
  int acc_core = 0;
  bool gather = false;
  bool needs_acc = false;
  std::vector<Group> groups;  // ordered by (rb, core)
  std::vector<Run> runs;
};

struct Binding {
  int producer = -1;
  int core = 0;
  int c = 1, hp = 1, wp = 1, pad = 0;
  int h = 1, w = 1;  // unpadded
  bool aliased = false;
  std::string buf;    // owner core's buffer name (producer's output when aliased)
  int buf_core = 0;
  std::string stage;  // CHW staging buffer for the network input ("" = direct load)
};

std::string lname(int id) { return "L" + std::to_string(id); }

class Codegen {
 public:
  Codegen(const Network& net, std::span<const Tiling> tilings, const Placement& placement, const ArchConfig& cfg)
      : net_(net), tilings_(tilings), placement_(placement), cfg_(cfg) {}

  CodegenResult run() {
    const std::size_t n = net_.layers.size();
    matrix_.resize(n);
    core_.assign(n, 0);
    bindings_.resize(n);
    requests_.assign(static_cast<std::size_t>(cfg_.num_cores()), {});

    plan_matrix_layers();
    place_vector_layers();
    plan_bindings();
    plan_buffers();
    CodegenResult res;
    res.memory = allocate_memory(requests_, cfg_);
    for (const auto& m : res.memory)
      for (const auto& r : m.regions) addr_[{m.core, r.name}] = r.addr;

    emit_input_loads();
    schedule();
    emit_output();
    for (auto& [id, core] : prog_.cores) core.push(inst::Halt{});

    res.program = std::move(prog_);
    res.layer_core = core_;
    return res;
  }

 private:
  // ---------------------------------------------------------------- planning

  void plan_matrix_layers() {
    std::map<int, const Tiling*> tiling_of;
    for (const auto& t : tilings_) tiling_of[t.layer_id] = &t;
    std::map<int, int> next_group_id;  // per core

    for (const Layer& l : net_.layers) {
      if (!is_matrix(l)) continue;
      auto it = tiling_of.find(l.id);
      if (it == tiling_of.end()) throw Error("no tiling for layer " + std::to_string(l.id));
      const Tiling& t = *it->second;
      if (t.matrix_rows > kMaxMatrixRows)
        throw CompileError(CompileError::Kind::Unsupported,
                           "layer " + std::to_string(l.id) + " accumulates " + std::to_string(t.matrix_rows) +
                               " products per output (limit " + std::to_string(kMaxMatrixRows) + ")");
      MatrixLayer& m = matrix_[static_cast<std::size_t>(l.id)];
      m.g = geometry_of(l);
      m.quant = l.has_weights() ? l.quant : average_quant(m.g.kh * m.g.kw);
      m.gather = !(m.g.kh == 1 || m.g.kw == m.g.w + 2 * m.g.pad);

      auto wperm = window_weights(l, m.g, t);
      std::map<std::pair<int, int>, std::size_t> group_at;  // (rb, core) -> index
      std::vector<Group> groups;
      for (const auto& s : placement_.slots) {
        if (s.layer_id != l.id) continue;
        auto key = std::make_pair(s.row_block, s.core);
        auto [gi, fresh] = group_at.emplace(key, groups.size());
        if (fresh) {
          Group g;
          g.core = s.core;
          g.rb = s.row_block;
          g.local_id = next_group_id[s.core]++;
          g.rows_used = std::min(cfg_.xbar_rows, t.matrix_rows - s.row_block * cfg_.xbar_rows);
          groups.push_back(g);
        }
        groups[gi->second].members.emplace_back(s.col_block, s.xbar);
        write_image(s, t, wperm);
      }
      std::sort(groups.begin(), groups.end(),
                [](const Group& a, const Group& b) { return std::tie(a.rb, a.core) < std::tie(b.rb, b.core); });

      m.acc_core = -1;
      for (const auto& g : groups)
        if (g.has_block(0) && (m.acc_core < 0 || g.core < m.acc_core)) m.acc_core = g.core;
      if (m.acc_core < 0) throw Error("layer " + std::to_string(l.id) + " has no column-block 0 tile placed");

      const int xc = cfg_.xbar_cols;
      for (auto& g : groups) {
        std::sort(g.members.begin(), g.members.end());
        g.cb_lo = g.members.front().first;
        g.col_lo = g.cb_lo * xc;
        const int cb_hi = g.members.back().first;
        g.span = std::min(t.matrix_cols, (cb_hi + 1) * xc) - g.col_lo;
        const std::string base = lname(l.id) + ".g" + std::to_string(g.rb);
        g.psum = base + ".psum";
        if (g.core != m.acc_core) {
          g.slice = base + ".slice";
          g.recv = base + ".c" + std::to_string(g.core) + ".recv";
        }
        GroupEntry entry;
        entry.id = g.local_id;
        entry.input_len = g.rows_used;
        for (const auto& [cb, xbar] : g.members)
          entry.members.push_back({xbar, Addr{cb * xc - g.col_lo} * 4,
                                   std::min(xc, t.matrix_cols - cb * xc)});
        prog_.cores[g.core].groups.push_back(std::move(entry));
      }

      for (int cb = 0; cb < t.col_blocks; ++cb) {
        std::vector<int> src;
        for (std::size_t i = 0; i < groups.size(); ++i)
          if (groups[i].has_block(cb)) src.push_back(static_cast<int>(i));
        const int lo = cb * xc;
        const int len = std::min(xc, t.matrix_cols - lo);
        if (!m.runs.empty() && m.runs.back().sources == src) {
          m.runs.back().len += len;
        } else {
          m.runs.push_back({lo, len, src});
        }
        if (src.size() > 1) m.needs_acc = true;
      }
      m.groups = std::move(groups);
      core_[static_cast<std::size_t>(l.id)] = m.acc_core;
    }
  }

  /// Logical weights with rows reordered to the HWC window order (ky, kx, c).
  std::vector<std::int8_t> window_weights(const Layer& l, const Geometry& g, const Tiling& t) {
    const auto rows = static_cast<std::size_t>(t.matrix_rows);
    const auto cols = static_cast<std::size_t>(t.matrix_cols);
    std::vector<std::int8_t> out(rows * cols, 0);
    if (!l.has_weights()) {
      for (int ky = 0; ky < g.kh; ++ky)
        for (int kx = 0; kx < g.kw; ++kx)
          for (int c = 0; c < g.c; ++c)
            out[(static_cast<std::size_t>(ky * g.kw + kx) * g.c + c) * cols + c] = 1;
      return out;
    }
    auto w = layer_weights(l);
    for (int c = 0; c < g.c; ++c)
      for (int ky = 0; ky < g.kh; ++ky)
        for (int kx = 0; kx < g.kw; ++kx) {
          std::size_t src = static_cast<std::size_t>((c * g.kh + ky) * g.kw + kx);
          std::size_t dst = static_cast<std::size_t>((ky * g.kw + kx) * g.c + c);
          std::copy_n(w.begin() + static_cast<std::ptrdiff_t>(src * cols), cols,
                      out.begin() + static_cast<std::ptrdiff_t>(dst * cols));
        }
    return out;
  }

  void write_image(const TileSlot& s, const Tiling& t, const std::vector<std::int8_t>& w) {
    const int xr = cfg_.xbar_rows, xc = cfg_.xbar_cols;
    const int r0 = s.row_block * xr, c0 = s.col_block * xc;
    const int rows = std::min(xr, t.matrix_rows - r0);
    const int cols = std::min(xc, t.matrix_cols - c0);
    WeightImage img;
    img.data.assign(static_cast<std::size_t>(xr) * xc, 0);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        img.data[static_cast<std::size_t>(i) * xc + j] =
            w[static_cast<std::size_t>(r0 + i) * t.matrix_cols + (c0 + j)];
    prog_.cores[s.core].weights[s.xbar] = std::move(img);
  }

  static bool single_input(const Layer& l) { return l.kind == LayerKind::ReLU || l.kind == LayerKind::Pool; }

  void place_vector_layers() {
    const std::size_t n = net_.layers.size();
    // Where a layer's output is first needed, following single-input vector consumers.
    std::vector<std::optional<int>> anchor(n);
    for (std::size_t i = n; i-- > 0;) {
      auto cons = net_.consumers(static_cast<int>(i));
      if (cons.empty()) continue;
      const Layer& c = net_.layers[static_cast<std::size_t>(cons.front())];
      anchor[i] = is_matrix(c) ? std::optional<int>(matrix_[static_cast<std::size_t>(c.id)].acc_core)
                               : anchor[static_cast<std::size_t>(c.id)];
    }
    for (const Layer& l : net_.layers) {
      if (is_matrix(l)) continue;
      const auto id = static_cast<std::size_t>(l.id);
      const int p0 = l.producers.front();
      const std::optional<int> from_producer = p0 >= 0 ? std::optional<int>(core_[static_cast<std::size_t>(p0)])
                                                       : std::nullopt;
      if (single_input(l)) {
        core_[id] = from_producer.value_or(anchor[id].value_or(0));
      } else {
        core_[id] = anchor[id].value_or(from_producer.value_or(0));
      }
    }
  }

  void plan_bindings() {
    for (const Layer& l : net_.layers) {
      const auto id = static_cast<std::size_t>(l.id);
      const int pad = is_matrix(l) ? matrix_[id].g.pad : 0;
      for (std::size_t k = 0; k < l.producers.size(); ++k) {
        const int p = l.producers[k];
        const Shape& s = net_.shape_of(p);
        Binding b;
        b.producer = p;
        b.core = core_[id];
        b.c = s.c;
        b.h = s.h;
        b.w = s.w;
        b.pad = pad;
        b.hp = s.h + 2 * pad;
        b.wp = s.w + 2 * pad;
        if (p >= 0 && core_[static_cast<std::size_t>(p)] == b.core && pad == 0) {
          b.aliased = true;
          b.buf = lname(p) + ".out";
        } else {
          b.buf = lname(l.id) + ".in" + std::to_string(k);
          if (p < 0 && !(pad == 0 && (s.c == 1 || s.h * s.w == 1))) b.stage = b.buf + ".chw";
        }
        b.buf_core = b.core;
        bindings_[id].push_back(b);
      }
    }
  }

  void request(int core, std::string name, Len bytes) {
    requests_[static_cast<std::size_t>(core)].push_back({std::move(name), bytes, 4});
  }

  void plan_buffers() {
    for (const Layer& l : net_.layers) {
      const auto id = static_cast<std::size_t>(l.id);
      const int home = core_[id];
      for (const auto& b : bindings_[id]) {
        if (b.aliased) continue;
        request(b.core, b.buf, Len{b.hp} * b.wp * b.c);
        if (!b.stage.empty()) request(b.core, b.stage, Len{b.h} * b.w * b.c);
      }
      request(home, lname(l.id) + ".out", l.out_shape.numel());
      if (is_matrix(l)) {
        const MatrixLayer& m = matrix_[id];
        if (m.gather) request(home, lname(l.id) + ".win", Len{m.g.kh} * m.g.kw * m.g.c);
        if (m.needs_acc) request(home, lname(l.id) + ".acc", Len{m.g.k} * 4);
        for (const auto& g : m.groups) {
          if (g.core == home) {
            request(home, g.psum, Len{g.span} * 4);
          } else {
            request(home, g.recv, Len{g.span} * 4);
            request(g.core, g.slice, g.rows_used);
            request(g.core, g.psum, Len{g.span} * 4);
          }
        }
      } else if (l.kind == LayerKind::Pool && l.kernel_h > 1) {
        request(home, lname(l.id) + ".colmax", Len{l.in_shape.w} * l.in_shape.c);
      }
    }
    const Layer& t = net_.layers[static_cast<std::size_t>(net_.terminal())];
    if (needs_transpose(t.out_shape)) request(core_[static_cast<std::size_t>(t.id)], "out.chw", t.out_shape.numel());
  }

  static bool needs_transpose(const Shape& s) { return s.c > 1 && s.h * s.w > 1; }

  // ---------------------------------------------------------------- emission

  Addr addr(int core, const std::string& name) const {
    auto it = addr_.find({core, name});
    if (it == addr_.end()) throw Error("internal: core " + std::to_string(core) + " has no buffer " + name);
    return it->second;
  }

  Addr binding_base(const Binding& b) const { return addr(b.buf_core, b.buf); }

  /// Address of padded coordinate (py, px) in a binding buffer.
  Addr binding_at(const Binding& b, int py, int px) const {
    return binding_base(b) + (Addr{py} * b.wp + px) * b.c;
  }

  void emit(int core, Instruction i, int layer) { prog_.cores[core].push(std::move(i), layer); }

  void transfer(int from, Addr src, int to, Addr dst, Len len, int layer) {
    int tag = next_tag_[{from, to}]++;
    emit(from, inst::Send{to, src, len, tag}, layer);
    emit(to, inst::Recv{from, dst, len, tag}, layer);
  }

  void emit_input_loads() {
    for (const Layer& l : net_.layers) {
      for (const auto& b : bindings_[static_cast<std::size_t>(l.id)]) {
        if (b.producer >= 0) continue;
        const Len n = Len{b.h} * b.w * b.c;
        if (b.stage.empty()) {
          emit(b.core, inst::Load{binding_base(b), 0, n}, l.id);
          continue;
        }
        const Addr stage = addr(b.core, b.stage);
        emit(b.core, inst::Load{stage, 0, n}, l.id);
        for (int y = 0; y < b.h; ++y)
          for (int x = 0; x < b.w; ++x)
            emit(b.core,
                 inst::VCopy{binding_at(b, y + b.pad, x + b.pad), stage + Addr{y} * b.w + x, b.c, Len{b.h} * b.w},
                 l.id);
      }
    }
  }

  /// Last producer row that output row `y` of `l` reads.
  int needed_row(const Layer& l, const Binding& b, int y) const {
    if (is_matrix(l) || l.kind == LayerKind::Pool) {
      const int kh = is_matrix(l) ? matrix_[static_cast<std::size_t>(l.id)].g.kh : l.kernel_h;
      return std::min(b.h - 1, y * l.stride - b.pad + kh - 1);
    }
    return y;
  }

  void schedule() {
    const std::size_t n = net_.layers.size();
    std::vector<int> done(n, 0);
    auto rows_ready = [&](int p) { return p < 0 ? net_.input_shape.h : done[static_cast<std::size_t>(p)]; };
    bool remaining = true;
    while (remaining) {
      remaining = false;
      bool progressed = false;
      for (const Layer& l : net_.layers) {
        const auto id = static_cast<std::size_t>(l.id);
        if (done[id] >= l.out_shape.h) continue;
        remaining = true;
        const int y = done[id];
        bool ready = true;
        for (const auto& b : bindings_[id])
          if (rows_ready(b.producer) <= needed_row(l, b, y)) ready = false;
        if (!ready) continue;
        emit_row(l, y);
        deliver(l, y);
        ++done[id];
        progressed = true;
      }
      if (remaining && !progressed) throw Error("internal: row schedule stalled");
    }
  }

  void emit_row(const Layer& l, int y) {
    if (is_matrix(l)) {
      for (int x = 0; x < l.out_shape.w; ++x) emit_pixel(l, y, x);
      return;
    }
    const auto id = static_cast<std::size_t>(l.id);
    const int home = core_[id];
    const Shape& os = l.out_shape;
    const Addr out_row = addr(home, lname(l.id) + ".out") + Addr{y} * os.w * os.c;
    const Len row_len = Len{os.w} * os.c;
    const auto& bs = bindings_[id];
    switch (l.kind) {
      case LayerKind::ReLU:
        emit(home, inst::VRelu{out_row, binding_at(bs[0], y, 0), row_len}, l.id);
        break;
      case LayerKind::Add:
        emit(home, inst::VAdd{ElemWidth::Byte, out_row, binding_at(bs[0], y, 0), binding_at(bs[1], y, 0), row_len},
             l.id);
        break;
      case LayerKind::Concat: {
        for (int x = 0; x < os.w; ++x) {
          Addr dst = out_row + Addr{x} * os.c;
          for (const auto& b : bs) {
            emit(home, inst::VCopy{dst, binding_at(b, y, x), b.c, 1}, l.id);
            dst += b.c;
          }
        }
        break;
      }
      case LayerKind::Pool: emit_max_pool_row(l, y, out_row); break;
      default: throw Error("internal: unexpected vector layer");
    }
  }

  void emit_max_pool_row(const Layer& l, int y, Addr out_row) {
    const auto id = static_cast<std::size_t>(l.id);
    const int home = core_[id];
    const Binding& b = bindings_[id][0];
    const Len row = Len{b.w} * b.c;
    Addr cols = binding_at(b, y * l.stride, 0);
    if (l.kernel_h > 1) {
      const Addr colmax = addr(home, lname(l.id) + ".colmax");
      emit(home, inst::VMax{ElemWidth::Byte, colmax, cols, binding_at(b, y * l.stride + 1, 0), row}, l.id);
      for (int ky = 2; ky < l.kernel_h; ++ky)
        emit(home, inst::VMax{ElemWidth::Byte, colmax, colmax, binding_at(b, y * l.stride + ky, 0), row}, l.id);
      cols = colmax;
    }
    for (int x = 0; x < l.out_shape.w; ++x) {
      const Addr dst = out_row + Addr{x} * b.c;
      const Addr src = cols + Addr{x} * l.stride * b.c;
      if (l.kernel_w == 1) {
        emit(home, inst::VCopy{dst, src, b.c, 1}, l.id);
        continue;
      }
      emit(home, inst::VMax{ElemWidth::Byte, dst, src, src + b.c, b.c}, l.id);
      for (int kx = 2; kx < l.kernel_w; ++kx)
        emit(home, inst::VMax{ElemWidth::Byte, dst, dst, src + Addr{kx} * b.c, b.c}, l.id);
    }
  }

  void emit_pixel(const Layer& l, int y, int x) {
    const auto id = static_cast<std::size_t>(l.id);
    const MatrixLayer& m = matrix_[id];
    const Geometry& g = m.g;
    const int a = m.acc_core;
    const Binding& b = bindings_[id][0];
    const Addr base = binding_at(b, y * g.stride, x * g.stride);
    Addr win = base;
    if (m.gather) {
      win = addr(a, lname(l.id) + ".win");
      const Len row = Len{g.kw} * g.c;
      for (int ky = 0; ky < g.kh; ++ky)
        emit(a, inst::VCopy{win + ky * row, base + Addr{ky} * b.wp * b.c, row, 1}, l.id);
    }
    const Addr rows_per_block = cfg_.xbar_rows;
    for (const auto& gr : m.groups)
      if (gr.core != a)
        transfer(a, win + gr.rb * rows_per_block, gr.core, addr(gr.core, gr.slice), gr.rows_used, l.id);
    for (const auto& gr : m.groups) {
      if (gr.core == a)
        emit(a, inst::Mvm{gr.local_id, win + gr.rb * rows_per_block, addr(a, gr.psum)}, l.id);
      else
        emit(gr.core, inst::Mvm{gr.local_id, addr(gr.core, gr.slice), addr(gr.core, gr.psum)}, l.id);
    }
    for (const auto& gr : m.groups)
      if (gr.core != a) transfer(gr.core, addr(gr.core, gr.psum), a, addr(a, gr.recv), Len{gr.span} * 4, l.id);

    auto source = [&](int gi, int col) {
      const Group& gr = m.groups[static_cast<std::size_t>(gi)];
      const Addr buf = gr.core == a ? addr(a, gr.psum) : addr(a, gr.recv);
      return buf + Addr{col - gr.col_lo} * 4;
    };
    const Addr out = addr(a, lname(l.id) + ".out") + (Addr{y} * g.wo + x) * g.k;
    for (const auto& r : m.runs) {
      Addr src = source(r.sources[0], r.col_lo);
      if (r.sources.size() > 1) {
        const Addr acc = addr(a, lname(l.id) + ".acc") + Addr{r.col_lo} * 4;
        emit(a, inst::VAdd{ElemWidth::Word, acc, src, source(r.sources[1], r.col_lo), r.len}, l.id);
        for (std::size_t s = 2; s < r.sources.size(); ++s)
          emit(a, inst::VAdd{ElemWidth::Word, acc, acc, source(r.sources[s], r.col_lo), r.len}, l.id);
        src = acc;
      }
      emit(a, inst::VScale{out + r.col_lo, src, r.len, m.quant.multiplier, m.quant.shift}, l.id);
    }
  }

  /// Moves output row `y` of `l` into every consumer's input buffer.
  void deliver(const Layer& l, int y) {
    const int home = core_[static_cast<std::size_t>(l.id)];
    const Shape& s = l.out_shape;
    const Len len = Len{s.w} * s.c;
    const Addr src = addr(home, lname(l.id) + ".out") + Addr{y} * len;
    for (int c : net_.consumers(l.id)) {
      for (const auto& b : bindings_[static_cast<std::size_t>(c)]) {
        if (b.producer != l.id || b.aliased) continue;
        const Addr dst = binding_at(b, y + b.pad, b.pad);
        if (b.core == home)
          emit(home, inst::VCopy{dst, src, len, 1}, c);
        else
          transfer(home, src, b.core, dst, len, c);
      }
    }
  }

  void emit_output() {
    const Layer& t = net_.layers[static_cast<std::size_t>(net_.terminal())];
    const int home = core_[static_cast<std::size_t>(t.id)];
    const Shape& s = t.out_shape;
    Addr src = addr(home, lname(t.id) + ".out");
    if (needs_transpose(s)) {
      const Addr chw = addr(home, "out.chw");
      const Len hw = Len{s.h} * s.w;
      for (int c = 0; c < s.c; ++c) emit(home, inst::VCopy{chw + c * hw, src + c, hw, s.c}, t.id);
      src = chw;
    }
    emit(home, inst::Store{output_gaddr(net_), src, s.numel()}, t.id);
  }

  const Network& net_;
  std::span<const Tiling> tilings_;
  const Placement& placement_;
  const ArchConfig& cfg_;

  std::vector<MatrixLayer> matrix_;
  std::vector<int> core_;
  std::vector<std::vector<Binding>> bindings_;
  std::vector<std::vector<BufferRequest>> requests_;
  std::map<std::pair<int, std::string>, Addr> addr_;
  std::map<std::pair<int, int>, int> next_tag_;
  Program prog_;
};

}  // namespace

Addr output_gaddr(const Network& net) {
  const Addr n = net.input_shape.numel();
  return (n + 255) / 256 * 256;
}

CodegenResult schedule_and_codegen(const Network& net, std::span<const Tiling> tilings,
                                   const Placement& placement, const ArchConfig& cfg) {
  return Codegen(net, tilings, placement, cfg).run();
}

CompileResult compile(const Network& net, const ArchConfig& cfg, Strategy strategy) {
  CompileResult r;
  r.strategy = strategy;
  r.tilings = tile_network(net, cfg);
  r.placement = map_tiles(r.tilings, cfg, strategy);
  if (auto v = check_placement(r.placement, r.tilings, strategy); !v.empty())
    throw Error("internal: placement invariant broken: " + v.front().str());
  auto cg = schedule_and_codegen(net, r.tilings, r.placement, cfg);
  r.program = std::move(cg.program);
  r.memory = std::move(cg.memory);
  r.layer_core = std::move(cg.layer_core);
  r.output_addr = output_gaddr(net);
  r.output_bytes = net.layers[static_cast<std::size_t>(net.terminal())].out_shape.numel();
  if (auto v = validate_program(r.program, cfg); !v.empty())
    throw CompileError(CompileError::Kind::Unsupported, "generated program is invalid: " + v.front().str());
  return r;
}

std::string placement_report(const Network& net, const CompileResult& result) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["network"] = net.name;
  doc["strategy"] = std::string(strategy_name(result.strategy));
  doc["output_gaddr"] = result.output_addr;
  doc["output_bytes"] = result.output_bytes;

  ordered_json layers = ordered_json::array();
  for (const Layer& l : net.layers) {
    ordered_json jl;
    jl["id"] = l.id;
    jl["type"] = std::string(kind_name(l.kind));
    jl["home_core"] = result.layer_core[static_cast<std::size_t>(l.id)];
    ordered_json tiles = ordered_json::array();
    std::set<int> cores;
    for (const auto& s : result.placement.slots) {
      if (s.layer_id != l.id) continue;
      tiles.push_back({{"row_block", s.row_block}, {"col_block", s.col_block}, {"core", s.core}, {"xbar", s.xbar}});
      cores.insert(s.core);
    }
    for (const auto& t : result.tilings) {
      if (t.layer_id != l.id) continue;
      jl["matrix_rows"] = t.matrix_rows;
      jl["matrix_cols"] = t.matrix_cols;
      jl["row_blocks"] = t.row_blocks;
      jl["col_blocks"] = t.col_blocks;
    }
    jl["cores"] = std::vector<int>(cores.begin(), cores.end());
    jl["tiles"] = std::move(tiles);
    layers.push_back(std::move(jl));
  }
  doc["layers"] = std::move(layers);

  ordered_json cores = ordered_json::array();
  auto used = result.placement.used_per_core();
  for (const auto& m : result.memory) {
    if (m.regions.empty() && used[static_cast<std::size_t>(m.core)] == 0) continue;
    ordered_json jc;
    jc["id"] = m.core;
    jc["xbars_used"] = used[static_cast<std::size_t>(m.core)];
    auto ls = result.placement.layers_on_core(m.core);
    jc["layers"] = std::vector<int>(ls.begin(), ls.end());
    jc["memory_used"] = m.used;
    ordered_json regions = ordered_json::array();
    for (const auto& r : m.regions) regions.push_back({{"name", r.name}, {"addr", r.addr}, {"bytes", r.bytes}});
    jc["memory"] = std::move(regions);
    cores.push_back(std::move(jc));
  }
  doc["cores"] = std::move(cores);
  return doc.dump(2) + "\n";
}

}  // namespace pimsim
