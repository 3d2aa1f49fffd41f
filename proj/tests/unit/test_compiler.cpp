#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "pimsim/compiler.hpp"

#include <json.hpp>

using namespace pimsim;

namespace {

std::vector<Tiling> tilings_of(const std::vector<int>& counts, const ArchConfig& cfg) {
  // One row block per layer so tile counts map straight to column blocks.
  std::vector<Tiling> out;
  for (std::size_t i = 0; i < counts.size(); ++i)
    out.push_back(tile_matrix(cfg.xbar_rows, counts[i] * cfg.xbar_cols, cfg, static_cast<int>(i)));
  return out;
}

std::vector<std::pair<int, int>> core_layer_counts(const Placement& p, int core) {
  std::map<int, int> m;
  for (const auto& s : p.slots)
    if (s.core == core) ++m[s.layer_id];
  return {m.begin(), m.end()};
}

std::vector<std::string> mnemonics(const CoreProgram& cp) {
  std::vector<std::string> out;
  for (const auto& i : cp.code) {
    std::string m(mnemonic(i));
    if (const auto* v = std::get_if<inst::VAdd>(&i)) m += v->width == ElemWidth::Word ? ".w" : ".b";
    out.push_back(m);
  }
  return out;
}

auto no_files = [](int, int, std::span<const std::int8_t>) { return std::string("w.bin"); };

}  // namespace

TEST_CASE("tile_matrix") {
  ArchConfig cfg;
  auto t = tile_matrix(300, 200, cfg);
  CHECK(t.row_blocks == 3);
  CHECK(t.col_blocks == 2);
  REQUIRE(t.tiles.size() == 6);
  CHECK(t.tiles[4].row_block == 2);
  CHECK(t.tiles[4].rows_used == 44);
  CHECK(t.tiles[5].cols_used == 72);
  CHECK(t.tiles[1].rows_used == 128);
  CHECK(tile_matrix(128, 128, cfg).tiles.size() == 1);
  auto one = tile_matrix(1, 1, cfg);
  REQUIRE(one.tiles.size() == 1);
  CHECK(one.tiles[0].rows_used == 1);
  CHECK(one.tiles[0].cols_used == 1);
}

TEST_CASE("tile_network covers weight layers and avg pools") {
  auto t = tile_network(test::fixture_net("tiny_resnet"), test::desk());
  std::vector<int> ids;
  for (const auto& x : t) ids.push_back(x.layer_id);
  CHECK(ids == std::vector<int>{0, 2, 4, 7, 9, 12, 13});
}

TEST_CASE("utilization-first packs tightly") {
  auto cfg = test::small_cfg(2, 2, 8, 16, 16);
  auto p = map_utilization_first(tilings_of({6, 5, 3}, cfg), cfg);
  CHECK(core_layer_counts(p, 0) == std::vector<std::pair<int, int>>{{0, 6}, {1, 2}});
  CHECK(core_layer_counts(p, 1) == std::vector<std::pair<int, int>>{{1, 3}, {2, 3}});

  ArchConfig big;
  big.mesh_width = 2;
  big.xbars_per_core = 512;
  auto q = map_utilization_first(tilings_of({600}, big), big);
  CHECK(q.used_per_core() == std::vector<int>{512, 88});

  auto single = map_utilization_first(tilings_of({1}, cfg), cfg);
  REQUIRE(single.slots.size() == 1);
  CHECK(single.slots[0].core == 0);
  CHECK(single.slots[0].xbar == 0);
}

TEST_CASE("performance-first gives each layer its own cores") {
  auto cfg = test::small_cfg(2, 2, 8, 16, 16);
  auto p = map_performance_first(tilings_of({6, 5, 3}, cfg), cfg);
  CHECK(core_layer_counts(p, 0) == std::vector<std::pair<int, int>>{{0, 6}});
  CHECK(core_layer_counts(p, 1) == std::vector<std::pair<int, int>>{{1, 5}});
  CHECK(core_layer_counts(p, 2) == std::vector<std::pair<int, int>>{{2, 3}});

  auto q = map_performance_first(tilings_of({9, 1}, cfg), cfg);
  CHECK(core_layer_counts(q, 0) == std::vector<std::pair<int, int>>{{0, 8}});
  CHECK(core_layer_counts(q, 1) == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(core_layer_counts(q, 2) == std::vector<std::pair<int, int>>{{1, 1}});

  auto chip = test::small_cfg(8, 8, 8, 16, 16);
  std::vector<int> many(65, 1);
  try {
    map_performance_first(tilings_of(many, chip), chip);
    FAIL("expected capacity error");
  } catch (const CompileError& e) {
    CHECK(e.kind() == CompileError::Kind::CapacityExceeded);
  }
  many.pop_back();
  CHECK(map_performance_first(tilings_of(many, chip), chip).slots.size() == 64);
}

TEST_CASE("randomized placement properties") {
  std::mt19937_64 rng(99);
  auto r = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int cases = 0;
  for (int it = 0; it < 600; ++it) {
    auto cfg = test::small_cfg(r(1, 4), r(1, 4), r(1, 9), 8 * r(1, 4), 8 * r(1, 4));
    std::vector<Tiling> tl;
    int layers = r(1, 8);
    for (int l = 0; l < layers; ++l) tl.push_back(tile_matrix(r(1, 100), r(1, 100), cfg, l));
    long total = 0, perf_cores = 0;
    for (const auto& t : tl) {
      total += static_cast<long>(t.tiles.size());
      perf_cores += (static_cast<long>(t.tiles.size()) + cfg.xbars_per_core - 1) / cfg.xbars_per_core;
    }
    for (Strategy s : {Strategy::UtilizationFirst, Strategy::PerformanceFirst}) {
      bool fits = s == Strategy::UtilizationFirst ? total <= long{cfg.num_cores()} * cfg.xbars_per_core
                                                  : perf_cores <= cfg.num_cores();
      ++cases;
      try {
        auto p = map_tiles(tl, cfg, s);
        CHECK(fits);
        CHECK(check_placement(p, tl, s).empty());
        CHECK(p == map_tiles(tl, cfg, s));
      } catch (const CompileError& e) {
        CHECK_FALSE(fits);
        CHECK(e.kind() == CompileError::Kind::CapacityExceeded);
      }
    }
  }
  CHECK(cases >= 1000);
}

TEST_CASE("check_placement reports broken placements") {
  auto cfg = test::small_cfg(2, 1, 4, 16, 16);
  auto tl = tilings_of({3, 2}, cfg);
  auto p = map_performance_first(tl, cfg);
  CHECK(check_placement(p, tl, Strategy::PerformanceFirst).empty());
  auto dup = p;
  dup.slots[1].xbar = dup.slots[0].xbar;
  CHECK_FALSE(check_placement(dup, tl, Strategy::PerformanceFirst).empty());
  auto missing = p;
  missing.slots.pop_back();
  CHECK_FALSE(check_placement(missing, tl, Strategy::PerformanceFirst).empty());
  auto mixed = p;
  mixed.slots.back().core = 0;
  mixed.slots.back().xbar = 3;
  CHECK_FALSE(check_placement(mixed, tl, Strategy::PerformanceFirst).empty());
}

TEST_CASE("allocate_memory") {
  ArchConfig cfg;
  cfg.mesh_width = 2;
  cfg.local_mem_bytes = 1024;
  auto m = allocate_memory({{{"in", 128}, {"psum", 512}}, {{"a", 3}, {"b", 5}, {"c", 7}, {"d", 1}}}, cfg);
  const auto& in = m[0].at("in");
  const auto& ps = m[0].at("psum");
  CHECK(in.bytes == 128);
  CHECK(ps.bytes == 512);
  CHECK((in.addr + in.bytes <= ps.addr || ps.addr + ps.bytes <= in.addr));
  for (std::size_t i = 0; i < m[1].regions.size(); ++i)
    for (std::size_t j = i + 1; j < m[1].regions.size(); ++j) {
      const auto& a = m[1].regions[i];
      const auto& b = m[1].regions[j];
      CHECK((a.addr + a.bytes <= b.addr || b.addr + b.bytes <= a.addr));
    }
  CHECK_THROWS_AS(allocate_memory({{{"big", 1025}}}, cfg), CompileError);
  try {
    allocate_memory({{}, {{"x", 600}, {"y", 600}}}, cfg);
    FAIL("expected overflow");
  } catch (const CompileError& e) {
    CHECK(e.kind() == CompileError::Kind::LocalMemoryOverflow);
    CHECK(std::string(e.what()).find("core 1") != std::string::npos);
  }
}

TEST_CASE("minimal FC pipeline") {
  auto cfg = test::small_cfg(2, 2, 2, 16, 16);
  auto net = parse_network(R"({"name":"t","input_shape":[16],"layers":[
    {"id":0,"type":"fc","out_features":8,"weight_seed":1,"quant":{"multiplier":1,"shift":4}}]})");
  auto r = compile(net, cfg, Strategy::UtilizationFirst);
  REQUIRE(r.program.cores.size() == 1);
  CHECK(mnemonics(r.program.cores.at(0)) == std::vector<std::string>{"LOAD", "MVM", "VSCALE", "STORE", "HALT"});
}

TEST_CASE("row-block partials reduce on the accumulating core") {
  auto cfg = test::small_cfg(2, 2, 2, 16, 16);
  auto net = parse_network(R"({"name":"t","input_shape":[40],"layers":[
    {"id":0,"type":"fc","out_features":8,"weight_seed":1,"quant":{"multiplier":1,"shift":4}}]})");
  auto r = compile(net, cfg, Strategy::UtilizationFirst);
  REQUIRE(r.program.cores.size() == 2);
  auto acc = mnemonics(r.program.cores.at(0));
  CHECK(std::count(acc.begin(), acc.end(), "VADD.w") == 2);
  CHECK(std::count(acc.begin(), acc.end(), "RECV") == 1);
  auto remote = mnemonics(r.program.cores.at(1));
  CHECK(std::count(remote.begin(), remote.end(), "SEND") == 1);
  CHECK(std::count(remote.begin(), remote.end(), "VADD.w") == 0);
}

TEST_CASE("residual add receives both operands") {
  auto cfg = test::small_cfg(2, 2, 2, 16, 16);
  auto net = parse_network(R"({"name":"t","input_shape":[4,2,2],"layers":[
    {"id":0,"type":"conv","out_channels":4,"kernel":1,"weight_seed":1,"quant":{"multiplier":1,"shift":4}},
    {"id":1,"type":"conv","out_channels":4,"kernel":1,"weight_seed":2,"quant":{"multiplier":1,"shift":4},"producers":[-1]},
    {"id":2,"type":"add","producers":[0,1]},
    {"id":3,"type":"fc","out_features":4,"weight_seed":3,"quant":{"multiplier":1,"shift":4}}]})");
  auto r = compile(net, cfg, Strategy::PerformanceFirst);
  int home = r.layer_core[2];
  CHECK(home != r.layer_core[0]);
  CHECK(home != r.layer_core[1]);
  const auto& cp = r.program.cores.at(home);
  std::set<int> sources;
  int recvs = 0;
  for (const auto& i : cp.code) {
    if (const auto* v = std::get_if<inst::VAdd>(&i)) {
      CHECK(v->width == ElemWidth::Byte);
      break;
    }
    if (const auto* rv = std::get_if<inst::Recv>(&i)) {
      ++recvs;
      sources.insert(rv->src_core);
    }
  }
  CHECK(recvs == 2);
  CHECK(sources.size() == 2);
}

TEST_CASE("average_quant matches rounded division") {
  for (int n = 1; n <= 64; ++n) {
    auto q = average_quant(n);
    for (int s = -128 * n; s <= 127 * n; ++s)
      REQUIRE(requantize(s, q.multiplier, q.shift) == saturate_int8(div_round_half_away(s, n)));
  }
}

TEST_CASE("compiled fixtures validate") {
  auto cfg = test::desk();
  for (const char* name : {"mlp3", "tiny_cnn", "tiny_resnet", "tiny_vgg_concat"}) {
    auto net = test::fixture_net(name);
    for (Strategy s : {Strategy::UtilizationFirst, Strategy::PerformanceFirst}) {
      CAPTURE(name);
      auto r = compile(net, cfg, s);
      CHECK(validate_program(r.program, cfg).empty());
      CHECK(check_placement(r.placement, r.tilings, s).empty());
      CHECK(parse_asm(emit_asm(r.program, no_files), [&](const std::string&) {
              return std::vector<std::int8_t>{};
            }).cores.size() == r.program.cores.size());
      CHECK(nlohmann::json::parse(placement_report(net, r)).contains("layers"));
    }
    auto a = compile(net, cfg, Strategy::UtilizationFirst).placement;
    auto b = compile(net, cfg, Strategy::PerformanceFirst).placement;
    CHECK_FALSE(a == b);
  }
}

TEST_CASE("compile errors") {
  auto tiny = test::small_cfg(1, 1, 1, 16, 16);
  try {
    compile(test::fixture_net("mlp3"), tiny, Strategy::UtilizationFirst);
    FAIL("expected capacity error");
  } catch (const CompileError& e) {
    CHECK(e.kind() == CompileError::Kind::CapacityExceeded);
  }
  auto cramped = test::desk();
  cramped.local_mem_bytes = 256;
  try {
    compile(test::fixture_net("tiny_cnn"), cramped, Strategy::PerformanceFirst);
    FAIL("expected overflow");
  } catch (const CompileError& e) {
    CHECK(e.kind() == CompileError::Kind::LocalMemoryOverflow);
  }
  CHECK(parse_strategy("performance-first") == Strategy::PerformanceFirst);
  CHECK(parse_strategy("utilization") == Strategy::UtilizationFirst);
  CHECK_FALSE(parse_strategy("fast").has_value());
}
