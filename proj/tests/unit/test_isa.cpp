#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "pimsim/isa.hpp"

using namespace pimsim;

namespace {

Instruction random_inst(std::mt19937_64& rng, int n_code, int group_id) {
  auto r = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto a = [&] { return Addr{r(0, 4096)}; };
  auto w = [&] { return r(0, 1) ? ElemWidth::Word : ElemWidth::Byte; };
  switch (r(0, 15)) {
    case 0: return inst::Mvm{group_id, a(), a()};
    case 1: return inst::VAdd{w(), a(), a(), a(), r(1, 64)};
    case 2: return inst::VMax{w(), a(), a(), a(), r(1, 64)};
    case 3: return inst::VRelu{a(), a(), r(1, 64)};
    case 4: return inst::VCopy{a(), a(), r(1, 64), r(1, 8)};
    case 5: return inst::VScale{a(), a(), r(1, 64), r(0, 1 << 20), r(0, 31)};
    case 6: return inst::Send{r(0, 3), a(), r(1, 64), r(0, 100)};
    case 7: return inst::Recv{r(0, 3), a(), r(1, 64), r(0, 100)};
    case 8: return inst::Load{a(), a(), r(1, 64)};
    case 9: return inst::Store{a(), a(), r(1, 64)};
    case 10: return inst::Li{r(0, 31), std::int64_t{r(-100000, 100000)}};
    case 11: return inst::SArith{static_cast<inst::ScalarOp>(r(0, 2)), r(0, 31), r(0, 31), r(0, 31)};
    case 12: return inst::Bne{r(0, 31), r(0, 31), r(0, n_code - 1)};
    case 13: return inst::Jmp{r(0, n_code - 1)};
    case 14: return inst::Nop{};
    default: return inst::Halt{};
  }
}

Program random_program(std::mt19937_64& rng) {
  Program p;
  int cores = std::uniform_int_distribution<int>(1, 3)(rng);
  for (int c = 0; c < cores; ++c) {
    CoreProgram& cp = p.cores[c * 2];
    cp.groups.push_back({0, 16, {{0, 0, 8}, {1, 32, 4}}});
    cp.weights[0].seed = 77 + c;
    cp.weights[1].data.assign(4, 3);
    cp.weights[1].file = "w.bin";
    int n = std::uniform_int_distribution<int>(1, 30)(rng);
    for (int k = 0; k < n; ++k)
      cp.push(random_inst(rng, n, 0), std::uniform_int_distribution<int>(-1, 3)(rng));
  }
  return p;
}

int asm_error_line(const std::string& text) {
  try {
    parse_asm(text);
  } catch (const AsmError& e) {
    return e.line();
  }
  return -1;
}

bool has(const std::vector<Violation>& v, Violation::Kind k, const std::string& fragment) {
  for (const auto& x : v)
    if (x.kind == k && x.message.find(fragment) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("assembly round-trips randomized programs") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    Program p = random_program(rng);
    std::map<std::string, std::vector<std::int8_t>> files;
    auto writer = [&](int core, int xbar, std::span<const std::int8_t> d) {
      std::string name = "c" + std::to_string(core) + "x" + std::to_string(xbar);
      files[name].assign(d.begin(), d.end());
      return name;
    };
    auto reader = [&](const std::string& name) { return files.at(name); };
    std::string text = emit_asm(p, writer);
    Program q = parse_asm(text, reader);
    CHECK(q == p);
    CHECK(emit_asm(q, writer) == text);
  }
}

TEST_CASE("assembly syntax") {
  auto p = parse_asm(R"(
.core 1
.group 3 in=8 xbar=0 off=0 out=4 xbar=2 off=16 out=2
.weights xbar=0 seed=5
.layer 7
start: LI r1, -4   # comment
  VADD.b 0x10, 0x20, 0x30, 8
  VADD 0x10, 0x20, 0x30, 8
  MVM g3, 0x0, 0x100
  BNE r1, r0, start
  JMP end
end: HALT
)");
  const auto& c = p.cores.at(1);
  REQUIRE(c.code.size() == 7);
  CHECK(std::get<inst::Li>(c.code[0]).imm == -4);
  CHECK(std::get<inst::VAdd>(c.code[1]).width == ElemWidth::Byte);
  CHECK(std::get<inst::VAdd>(c.code[2]).width == ElemWidth::Word);
  CHECK(std::get<inst::Bne>(c.code[4]).target == 0);
  CHECK(std::get<inst::Jmp>(c.code[5]).target == 6);
  CHECK(c.layer_tags[3] == 7);
  REQUIRE(c.groups.size() == 1);
  CHECK(c.groups[0].members.size() == 2);
  CHECK(c.groups[0].members[1].out_offset == 16);
  CHECK(*c.weights.at(0).seed == 5);
}

TEST_CASE("assembly errors carry line numbers") {
  CHECK(asm_error_line("HALT") == 1);
  CHECK(asm_error_line(".core 0\nFOO 1\n") == 2);
  CHECK(asm_error_line(".core 0\nVRELU 1, 2\n") == 2);
  CHECK(asm_error_line(".core 0\nJMP nowhere\nHALT\n") == 2);
  CHECK(asm_error_line(".core 0\nx: NOP\nx: HALT\n") == 3);
  CHECK(asm_error_line(".core 0\nHALT\n.core 0\nHALT\n") == 3);
  CHECK(asm_error_line(".core 0\n.group 0 in=4 xbar=0 off=0 out=1\n.group 0 in=4 xbar=1 off=0 out=1\n") == 3);
}

TEST_CASE("footprints") {
  GroupEntry g{0, 16, {{0, 0, 8}, {1, 64, 4}}};
  auto fp = footprint_of(inst::Mvm{0, 100, 200}, &g);
  REQUIRE(fp.mem_reads.size() == 1);
  CHECK(fp.mem_reads[0].lo == 100);
  CHECK(fp.mem_reads[0].hi == 116);
  REQUIRE(fp.mem_writes.size() == 2);
  CHECK(fp.mem_writes[1].lo == 264);
  CHECK(fp.mem_writes[1].hi == 280);
  auto cp = footprint_of(inst::VCopy{0, 10, 4, 3}, nullptr);
  CHECK(cp.mem_reads[0].hi == 10 + 3 * 3 + 1);
  auto vs = footprint_of(inst::VScale{0, 40, 5, 1, 0}, nullptr);
  CHECK(vs.mem_reads[0].hi == 60);
  CHECK(vs.mem_writes[0].hi == 5);
}

TEST_CASE("validate_program") {
  auto cfg = test::small_cfg(2, 2, 2, 16, 16);
  auto v = [&](const std::string& text) { return validate_program(parse_asm(text), cfg); };

  CHECK(v(".core 0\nHALT\n.core 3\nHALT\n").empty());
  CHECK(has(v(".core 0\nNOP\n"), Violation::Kind::Structural, "HALT"));
  CHECK(has(v(".core 4\nHALT\n"), Violation::Kind::Structural, "mesh"));
  CHECK(has(v(".core 0\nMVM g1, 0x0, 0x0\nHALT\n"), Violation::Kind::Structural, "undefined group"));
  CHECK(has(v(".core 0\n.group 0 in=17 xbar=0 off=0 out=1\nHALT\n"), Violation::Kind::Structural, "input_len"));
  CHECK(has(v(".core 0\n.group 0 in=4 xbar=2 off=0 out=1\nHALT\n"), Violation::Kind::Structural, "xbar"));
  CHECK(has(v(".core 0\n.group 0 in=4 xbar=0 off=0 out=4 xbar=1 off=8 out=4\nHALT\n"), Violation::Kind::Structural,
            "overlap"));
  CHECK(has(v(".core 0\nVRELU 0x0, 0x0, 0\nHALT\n"), Violation::Kind::Structural, "len"));
  CHECK(has(v(".core 0\nVCOPY 0x0, 0x0, 4, 0\nHALT\n"), Violation::Kind::Structural, "stride"));
  CHECK(has(v(".core 0\nVSCALE 0x0, 0x0, 4, 1, 32\nHALT\n"), Violation::Kind::Structural, "shift"));
  CHECK(has(v(".core 0\nVRELU 0xfffc, 0x0, 8\nHALT\n"), Violation::Kind::Structural, "outside local memory"));
  CHECK(has(v(".core 0\nSEND 0, 0x0, 4, 0\nHALT\n"), Violation::Kind::Structural, "itself"));
  CHECK(has(v(".core 0\nLI r40, 1\nHALT\n"), Violation::Kind::Structural, "register"));
  CHECK(has(v(".core 0\nSTORE 0xffffff, 0x0, 4\nHALT\n"), Violation::Kind::Structural, "gmem"));

  CHECK(has(v(".core 0\nSEND 1, 0x0, 4, 0\nHALT\n.core 1\nHALT\n"), Violation::Kind::Protocol, "no matching RECV"));
  CHECK(has(v(".core 0\nSEND 1, 0x0, 4, 0\nHALT\n.core 1\nRECV 0, 0x0, 8, 0\nHALT\n"), Violation::Kind::Protocol,
            "lengths"));
  CHECK(has(v(".core 0\nSEND 1, 0x0, 4, 0\nSEND 1, 0x0, 4, 0\nHALT\n.core 1\nRECV 0, 0x0, 4, 0\nRECV 0, 0x0, 4, 0\nHALT\n"),
            Violation::Kind::Protocol, "tag used"));
  // Crossed order: 0 sends a then b, 1 receives b then a.
  CHECK(has(v(".core 0\nSEND 1, 0x0, 4, 0\nSEND 1, 0x0, 4, 1\nHALT\n"
              ".core 1\nRECV 0, 0x0, 4, 1\nRECV 0, 0x0, 4, 0\nHALT\n"),
            Violation::Kind::Protocol, "cycle"));
  CHECK(v(".core 0\nSEND 1, 0x0, 4, 0\nRECV 1, 0x10, 4, 0\nHALT\n"
          ".core 1\nRECV 0, 0x0, 4, 0\nSEND 0, 0x0, 4, 0\nHALT\n")
            .empty());
}
