#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "pimsim/arch_config.hpp"

using namespace pimsim;

namespace {

ConfigError::Kind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.kind();
  }
  FAIL("expected a ConfigError");
  return ConfigError::Kind::Syntax;
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
  auto c = parse_config(R"({"mesh":{"width":2,"height":3},"core":{"xbars_per_core":4,"xbar_rows":32,"xbar_cols":16}})");
  CHECK(c.num_cores() == 6);
  CHECK(c.rob_size == 8);
  CHECK(c.dispatch_width == 4);
  CHECK(c.adcs_per_xbar == 1);
  CHECK(c.local_mem_bytes == 256 * 1024);
  CHECK(c.watchdog_cycles == 1'000'000);
  CHECK(c.timing == TimingParams{});
  CHECK(c.energy == EnergyParams{});
}

TEST_CASE("config errors are classified") {
  CHECK(kind_of("{") == ConfigError::Kind::Syntax);
  CHECK(kind_of(R"({"mesh":{"width":2,"height":2}})") == ConfigError::Kind::Schema);
  CHECK(kind_of(R"({"mesh":{"width":2,"height":2,"depth":1},"core":{"xbars_per_core":1,"xbar_rows":8,"xbar_cols":8}})") ==
        ConfigError::Kind::Schema);
  CHECK(kind_of(R"({"mesh":{"width":2,"height":2},"core":{"xbars_per_core":1,"xbar_rows":8,"xbar_cols":8},"extra":{}})") ==
        ConfigError::Kind::Schema);
  CHECK(kind_of(R"({"mesh":{"width":"2","height":2},"core":{"xbars_per_core":1,"xbar_rows":8,"xbar_cols":8}})") ==
        ConfigError::Kind::Schema);
  CHECK(kind_of(R"({"mesh":{"width":0,"height":2},"core":{"xbars_per_core":1,"xbar_rows":8,"xbar_cols":8}})") ==
        ConfigError::Kind::Semantic);
  CHECK(kind_of(R"({"mesh":{"width":2,"height":2},"core":{"xbars_per_core":1,"xbar_rows":8,"xbar_cols":8,"adcs_per_xbar":9}})") ==
        ConfigError::Kind::Semantic);
  CHECK(kind_of(R"({"mesh":{"width":2,"height":2,"global_mem_node":[2,0]},"core":{"xbars_per_core":1,"xbar_rows":8,"xbar_cols":8}})") ==
        ConfigError::Kind::Semantic);
}

TEST_CASE("config error names the offending path") {
  try {
    parse_config(R"({"mesh":{"width":2,"height":2},"core":{"xbars_per_core":1,"xbar_rows":8,"xbar_cols":8,"rob_size":0}})");
    FAIL("expected error");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "core.rob_size");
  }
}

TEST_CASE("emit/parse round-trips randomized configs") {
  std::mt19937_64 rng(1234);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto real = [&] { return std::uniform_real_distribution<double>(0.0, 50.0)(rng); };
  for (int i = 0; i < 200; ++i) {
    ArchConfig c;
    c.mesh_width = pick(1, 8);
    c.mesh_height = pick(1, 8);
    c.global_mem_node = {pick(0, c.mesh_width - 1), pick(0, c.mesh_height - 1)};
    c.xbars_per_core = pick(1, 512);
    c.xbar_rows = pick(1, 256);
    c.xbar_cols = pick(1, 256);
    c.adcs_per_xbar = pick(1, c.xbar_cols);
    c.local_mem_bytes = pick(1024, 1 << 20);
    c.rob_size = pick(1, 32);
    c.dispatch_width = pick(1, 8);
    c.timing.mvm_setup_cycles = pick(0, 20);
    c.timing.link_bytes_per_cycle = pick(1, 64);
    c.energy.mvm_energy_per_xbar_pj = real();
    c.energy.static_power_mw_per_core = real();
    REQUIRE(validate_config(c).empty());
    CHECK(parse_config(emit_config(c)) == c);
  }
}

TEST_CASE("shipped configs load") {
  auto full = load_config(test::fixture("configs/full_scale.json"));
  CHECK(full.num_cores() == 64);
  CHECK(full.xbars_per_core == 512);
  CHECK(full.xbar_rows == 128);
  CHECK(full.adcs_per_xbar == 1);
  CHECK_NOTHROW(test::desk());
}
