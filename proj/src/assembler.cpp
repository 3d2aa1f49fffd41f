#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "pimsim/isa.hpp"

namespace pimsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) return std::nullopt;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  if (v > static_cast<std::uint64_t>(INT64_MAX)) return std::nullopt;
  return neg ? -static_cast<std::int64_t>(v) : static_cast<std::int64_t>(v);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    bool quoted = false;
    while (i < s.size() && (quoted || !std::isspace(static_cast<unsigned char>(s[i])))) {
      if (s[i] == '"') quoted = !quoted;
      ++i;
    }
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

struct PendingLabel {
  std::size_t inst_index;
  std::string label;
  int line;
};

class Parser {
 public:
  Parser(const WeightReader& reader) : reader_(reader) {}

  Program run(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      ++line_no;
      line(text.substr(pos, nl - pos), line_no);
      pos = nl + 1;
    }
    finish_core();
    return std::move(program_);
  }

 private:
  void line(std::string_view raw, int ln) {
    std::string_view s = trim(strip_comment(raw));
    if (s.empty()) return;
    if (s.front() == '.') return directive(s, ln);

    // Optional "label:" prefix.
    std::size_t i = 0;
    if (is_ident_start(s[0])) {
      while (i < s.size() && is_ident_char(s[i])) ++i;
      std::size_t j = i;
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j < s.size() && s[j] == ':') {
        std::string label(s.substr(0, i));
        require_core(ln);
        if (labels_.count(label)) throw AsmError(ln, "duplicate label '" + label + "'");
        labels_[label] = static_cast<int>(core_->code.size());
        s = trim(s.substr(j + 1));
        if (s.empty()) return;
      }
    }
    instruction(s, ln);
  }

  void require_core(int ln) {
    if (!core_) throw AsmError(ln, "instruction or directive before any .core block");
  }

  void directive(std::string_view s, int ln) {
    auto tok = split_ws(s);
    std::string_view name = tok[0];
    if (name == ".core") {
      if (tok.size() != 2) throw AsmError(ln, "syntax error: expected '.core <id>'");
      auto id = parse_int(tok[1]);
      if (!id || *id < 0 || *id > INT32_MAX) throw AsmError(ln, "syntax error: bad core id");
      finish_core();
      int core_id = static_cast<int>(*id);
      if (program_.cores.count(core_id)) throw AsmError(ln, "duplicate .core " + std::to_string(core_id));
      core_ = &program_.cores[core_id];
      core_id_ = core_id;
      layer_ = -1;
      return;
    }
    require_core(ln);
    auto kv = [&](std::string_view t, std::string_view key) -> std::optional<std::string_view> {
      if (t.size() > key.size() && t.substr(0, key.size()) == key && t[key.size()] == '=')
        return t.substr(key.size() + 1);
      return std::nullopt;
    };
    auto kv_int = [&](std::string_view t, std::string_view key) -> std::int64_t {
      auto v = kv(t, key);
      if (!v) throw AsmError(ln, "syntax error: expected '" + std::string(key) + "=<int>', got '" + std::string(t) + "'");
      auto n = parse_int(*v);
      if (!n) throw AsmError(ln, "syntax error: bad integer in '" + std::string(t) + "'");
      return *n;
    };

    if (name == ".group") {
      if (tok.size() < 6 || (tok.size() - 3) % 3 != 0)
        throw AsmError(ln, "syntax error: expected '.group <id> in=<n> (xbar=<x> off=<o> out=<n>)+'");
      auto id = parse_int(tok[1]);
      if (!id || *id < 0 || *id > INT32_MAX) throw AsmError(ln, "syntax error: bad group id");
      if (core_->find_group(static_cast<int>(*id)))
        throw AsmError(ln, "duplicate group_id " + std::to_string(*id));
      GroupEntry g;
      g.id = static_cast<int>(*id);
      g.input_len = static_cast<int>(kv_int(tok[2], "in"));
      for (std::size_t k = 3; k < tok.size(); k += 3) {
        GroupMember m;
        m.xbar = static_cast<int>(kv_int(tok[k], "xbar"));
        m.out_offset = kv_int(tok[k + 1], "off");
        m.out_len = static_cast<int>(kv_int(tok[k + 2], "out"));
        g.members.push_back(m);
      }
      core_->groups.push_back(std::move(g));
    } else if (name == ".weights") {
      if (tok.size() != 3) throw AsmError(ln, "syntax error: expected '.weights xbar=<x> (file=\"..\" | seed=<n>)'");
      int xbar = static_cast<int>(kv_int(tok[1], "xbar"));
      if (core_->weights.count(xbar))
        throw AsmError(ln, "duplicate weights for xbar " + std::to_string(xbar));
      WeightImage img;
      if (auto seed = kv(tok[2], "seed")) {
        auto n = parse_int(*seed);
        if (!n || *n < 0) throw AsmError(ln, "syntax error: bad seed");
        img.seed = static_cast<std::uint64_t>(*n);
      } else if (auto file = kv(tok[2], "file")) {
        std::string_view f = *file;
        if (f.size() < 2 || f.front() != '"' || f.back() != '"')
          throw AsmError(ln, "syntax error: file name must be quoted");
        img.file = std::string(f.substr(1, f.size() - 2));
        if (!reader_) throw AsmError(ln, "no weight reader available for file '" + img.file + "'");
        try {
          img.data = reader_(img.file);
        } catch (const std::exception& e) {
          throw AsmError(ln, e.what());
        }
      } else {
        throw AsmError(ln, "syntax error: expected file= or seed=");
      }
      core_->weights[xbar] = std::move(img);
    } else if (name == ".layer") {
      if (tok.size() != 2) throw AsmError(ln, "syntax error: expected '.layer <id>'");
      auto id = parse_int(tok[1]);
      if (!id || *id < -1 || *id > INT32_MAX) throw AsmError(ln, "syntax error: bad layer id");
      layer_ = static_cast<int>(*id);
    } else {
      throw AsmError(ln, "unknown directive '" + std::string(name) + "'");
    }
  }

  void instruction(std::string_view s, int ln) {
    require_core(ln);
    std::size_t sp = 0;
    while (sp < s.size() && !std::isspace(static_cast<unsigned char>(s[sp]))) ++sp;
    std::string mn(s.substr(0, sp));
    for (auto& c : mn) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    std::string_view rest = trim(s.substr(sp));
    std::vector<std::string_view> ops;
    if (!rest.empty()) ops = split(rest, ',');

    std::string base = mn;
    std::optional<ElemWidth> width;
    if (auto dot = mn.find('.'); dot != std::string::npos) {
      base = mn.substr(0, dot);
      std::string suffix = mn.substr(dot + 1);
      if (suffix == "W") width = ElemWidth::Word;
      else if (suffix == "B") width = ElemWidth::Byte;
      else throw AsmError(ln, "unknown mnemonic '" + mn + "'");
      if (base != "VADD" && base != "VMAX") throw AsmError(ln, "unknown mnemonic '" + mn + "'");
    }

    auto expect = [&](std::size_t n) {
      if (ops.size() != n)
        throw AsmError(ln, "syntax error: " + base + " expects " + std::to_string(n) + " operands, got " +
                               std::to_string(ops.size()));
      for (auto op : ops)
        if (op.empty()) throw AsmError(ln, "syntax error: empty operand");
    };
    auto num = [&](std::size_t k) -> std::int64_t {
      auto v = parse_int(ops[k]);
      if (!v) throw AsmError(ln, "syntax error: expected a number, got '" + std::string(ops[k]) + "'");
      return *v;
    };
    auto small = [&](std::size_t k) -> int {
      std::int64_t v = num(k);
      if (v < INT32_MIN || v > INT32_MAX) throw AsmError(ln, "operand out of range: '" + std::string(ops[k]) + "'");
      return static_cast<int>(v);
    };
    auto prefixed = [&](std::size_t k, char p) -> int {
      std::string_view t = ops[k];
      if (t.size() < 2 || std::tolower(static_cast<unsigned char>(t[0])) != p)
        throw AsmError(ln, std::string("syntax error: expected '") + p + "<n>', got '" + std::string(t) + "'");
      auto v = parse_int(t.substr(1));
      if (!v || *v < 0 || *v > INT32_MAX) throw AsmError(ln, "syntax error: bad operand '" + std::string(t) + "'");
      return static_cast<int>(*v);
    };
    auto label = [&](std::size_t k) -> int {
      std::string_view t = ops[k];
      if (t.empty() || !is_ident_start(t[0]))
        throw AsmError(ln, "syntax error: expected a label, got '" + std::string(t) + "'");
      for (char c : t)
        if (!is_ident_char(c)) throw AsmError(ln, "syntax error: bad label '" + std::string(t) + "'");
      pending_.push_back({core_->code.size(), std::string(t), ln});
      return -1;
    };

    Instruction out;
    if (base == "MVM") {
      expect(3);
      out = inst::Mvm{prefixed(0, 'g'), num(1), num(2)};
    } else if (base == "VADD" || base == "VMAX") {
      expect(4);
      ElemWidth w = width.value_or(ElemWidth::Word);
      if (base == "VADD") out = inst::VAdd{w, num(0), num(1), num(2), num(3)};
      else out = inst::VMax{w, num(0), num(1), num(2), num(3)};
    } else if (base == "VRELU") {
      expect(3);
      out = inst::VRelu{num(0), num(1), num(2)};
    } else if (base == "VCOPY") {
      expect(4);
      out = inst::VCopy{num(0), num(1), num(2), num(3)};
    } else if (base == "VSCALE") {
      expect(5);
      out = inst::VScale{num(0), num(1), num(2), small(3), small(4)};
    } else if (base == "SEND") {
      expect(4);
      out = inst::Send{small(0), num(1), num(2), small(3)};
    } else if (base == "RECV") {
      expect(4);
      out = inst::Recv{small(0), num(1), num(2), small(3)};
    } else if (base == "LOAD") {
      expect(3);
      out = inst::Load{num(0), num(1), num(2)};
    } else if (base == "STORE") {
      expect(3);
      out = inst::Store{num(0), num(1), num(2)};
    } else if (base == "LI") {
      expect(2);
      out = inst::Li{prefixed(0, 'r'), num(1)};
    } else if (base == "SADD" || base == "SSUB" || base == "SMUL") {
      expect(3);
      inst::ScalarOp op = base == "SADD" ? inst::ScalarOp::Add : base == "SSUB" ? inst::ScalarOp::Sub : inst::ScalarOp::Mul;
      out = inst::SArith{op, prefixed(0, 'r'), prefixed(1, 'r'), prefixed(2, 'r')};
    } else if (base == "BNE") {
      expect(3);
      out = inst::Bne{prefixed(0, 'r'), prefixed(1, 'r'), label(2)};
    } else if (base == "JMP") {
      expect(1);
      out = inst::Jmp{label(0)};
    } else if (base == "NOP") {
      expect(0);
      out = inst::Nop{};
    } else if (base == "HALT") {
      expect(0);
      out = inst::Halt{};
    } else {
      throw AsmError(ln, "unknown mnemonic '" + mn + "'");
    }
    core_->push(std::move(out), layer_);
  }

  void finish_core() {
    if (!core_) return;
    for (const auto& p : pending_) {
      auto it = labels_.find(p.label);
      if (it == labels_.end()) throw AsmError(p.line, "undefined label '" + p.label + "'");
      std::visit(Overloaded{[&](inst::Bne& b) { b.target = it->second; },
                            [&](inst::Jmp& j) { j.target = it->second; }, [](auto&) {}},
                 core_->code[p.inst_index]);
    }
    pending_.clear();
    labels_.clear();
    core_ = nullptr;
  }

  const WeightReader& reader_;
  Program program_;
  CoreProgram* core_ = nullptr;
  int core_id_ = -1;
  int layer_ = -1;
  std::unordered_map<std::string, int> labels_;
  std::vector<PendingLabel> pending_;
};

std::string hex(std::int64_t v) {
  if (v < 0) return "-" + hex(-v);
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

Program parse_asm(std::string_view text, const WeightReader& reader) { return Parser(reader).run(text); }

std::string emit_asm(const Program& program, const WeightWriter& writer) {
  std::ostringstream os;
  for (const auto& [core_id, core] : program.cores) {
    os << ".core " << core_id << "\n";
    for (const auto& g : core.groups) {
      os << ".group " << g.id << " in=" << g.input_len;
      for (const auto& m : g.members) os << " xbar=" << m.xbar << " off=" << m.out_offset << " out=" << m.out_len;
      os << "\n";
    }
    for (const auto& [xbar, img] : core.weights) {
      os << ".weights xbar=" << xbar;
      if (img.seed) {
        os << " seed=" << *img.seed << "\n";
      } else {
        std::string name;
        if (writer) name = writer(core_id, xbar, img.data);
        else if (!img.file.empty()) name = img.file;
        else throw Error("emit_asm: literal weights for core " + std::to_string(core_id) + " xbar " +
                         std::to_string(xbar) + " need a weight writer");
        os << " file=\"" << name << "\"\n";
      }
    }

    std::set<int> targets;
    for (const auto& i : core.code) {
      if (auto* b = std::get_if<inst::Bne>(&i)) targets.insert(b->target);
      if (auto* j = std::get_if<inst::Jmp>(&i)) targets.insert(j->target);
    }
    int layer = -1;
    for (std::size_t k = 0; k < core.code.size(); ++k) {
      int tag = k < core.layer_tags.size() ? core.layer_tags[k] : -1;
      if (tag != layer) {
        os << ".layer " << tag << "\n";
        layer = tag;
      }
      if (targets.count(static_cast<int>(k))) os << "L" << k << ": ";
      const Instruction& ins = core.code[k];
      auto width = [](ElemWidth w) { return w == ElemWidth::Byte ? ".b" : ".w"; };
      std::visit(
          Overloaded{
              [&](const inst::Mvm& i) { os << "MVM g" << i.group << ", " << hex(i.src) << ", " << hex(i.dst); },
              [&](const inst::VAdd& i) {
                os << "VADD" << width(i.width) << " " << hex(i.dst) << ", " << hex(i.src1) << ", " << hex(i.src2)
                   << ", " << i.len;
              },
              [&](const inst::VMax& i) {
                os << "VMAX" << width(i.width) << " " << hex(i.dst) << ", " << hex(i.src1) << ", " << hex(i.src2)
                   << ", " << i.len;
              },
              [&](const inst::VRelu& i) { os << "VRELU " << hex(i.dst) << ", " << hex(i.src) << ", " << i.len; },
              [&](const inst::VCopy& i) {
                os << "VCOPY " << hex(i.dst) << ", " << hex(i.src) << ", " << i.len << ", " << i.src_stride;
              },
              [&](const inst::VScale& i) {
                os << "VSCALE " << hex(i.dst) << ", " << hex(i.src) << ", " << i.len << ", " << i.multiplier << ", "
                   << i.shift;
              },
              [&](const inst::Send& i) {
                os << "SEND " << i.dst_core << ", " << hex(i.src) << ", " << i.len << ", " << i.tag;
              },
              [&](const inst::Recv& i) {
                os << "RECV " << i.src_core << ", " << hex(i.dst) << ", " << i.len << ", " << i.tag;
              },
              [&](const inst::Load& i) { os << "LOAD " << hex(i.dst) << ", " << hex(i.gaddr) << ", " << i.len; },
              [&](const inst::Store& i) { os << "STORE " << hex(i.gaddr) << ", " << hex(i.src) << ", " << i.len; },
              [&](const inst::Li& i) { os << "LI r" << i.reg << ", " << i.imm; },
              [&](const inst::SArith& i) {
                os << mnemonic(ins) << " r" << i.rd << ", r" << i.ra << ", r" << i.rb;
              },
              [&](const inst::Bne& i) { os << "BNE r" << i.ra << ", r" << i.rb << ", L" << i.target; },
              [&](const inst::Jmp& i) { os << "JMP L" << i.target; },
              [&](const inst::Nop&) { os << "NOP"; },
              [&](const inst::Halt&) { os << "HALT"; },
          },
          ins);
      os << "\n";
    }
  }
  return os.str();
}

WeightReader file_weight_reader(const std::string& base_dir) {
  return [base_dir](const std::string& file) {
    std::filesystem::path p = file;
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open weight file '" + p.string() + "'");
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return std::vector<std::int8_t>(raw.begin(), raw.end());
  };
}

WeightWriter file_weight_writer(const std::string& out_dir) {
  return [out_dir](int core, int xbar, std::span<const std::int8_t> data) {
    std::string name = "core" + std::to_string(core) + "_xbar" + std::to_string(xbar) + ".bin";
    std::ofstream out(std::filesystem::path(out_dir) / name, std::ios::binary);
    if (!out) throw Error("cannot write weight file '" + name + "'");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    return name;
  };
}

}  // namespace pimsim
