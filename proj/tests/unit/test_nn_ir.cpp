#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "pimsim/nn_ir.hpp"

using namespace pimsim;

namespace {

// Exact round-half-away-from-zero of num / 2^shift using only integer comparisons.
std::int64_t exact_round(std::int64_t num, int shift) {
  const std::int64_t den = std::int64_t{1} << shift;
  const std::int64_t mag = num < 0 ? -num : num;
  std::int64_t q = mag / den;
  if (2 * (mag - q * den) >= den) ++q;
  return num < 0 ? -q : q;
}

std::string minimal(const std::string& layers, const std::string& shape = "[4]") {
  return R"({"name":"n","input_shape":)" + shape + R"(,"layers":[)" + layers + "]}";
}

}  // namespace

TEST_CASE("SplitMix64 reference values") {
  SplitMix64 g(0);
  CHECK(g.next() == 0xE220A8397B1DCDAFULL);
  CHECK(g.next() == 0x6E789E6AA1B965F4ULL);
  auto w = generate_weights(0, 1, 2);
  CHECK(w[0] == -30);  // top byte 0xE2
  CHECK(w[1] == 0x6E);
}

TEST_CASE("requantize matches exact rational rounding") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::int32_t> acc(-(1 << 24), 1 << 24);
  std::uniform_int_distribution<std::int32_t> mult(0, 1 << 12);
  std::uniform_int_distribution<int> shift(0, 31);
  for (int i = 0; i < 200000; ++i) {
    std::int32_t a = acc(rng), m = mult(rng);
    int s = shift(rng);
    std::int64_t want = exact_round(std::int64_t{a} * m, s);
    CHECK_MESSAGE(requantize(a, m, s) == saturate_int8(want), a << "*" << m << ">>" << s);
  }
  CHECK(requantize(1000, 3, 5) == 94);
  CHECK(requantize(-16, 1, 5) == -1);   // -0.5 rounds away from zero
  CHECK(requantize(-15, 1, 5) == 0);
  CHECK(requantize(16, 1, 5) == 1);
  CHECK(requantize(100000, 1, 0) == 127);
  CHECK(requantize(-100000, 1, 0) == -128);
}

TEST_CASE("div_round_half_away") {
  CHECK(div_round_half_away(5, 2) == 3);
  CHECK(div_round_half_away(-5, 2) == -3);
  CHECK(div_round_half_away(4, 3) == 1);
  CHECK(div_round_half_away(-4, 3) == -1);
  CHECK(div_round_half_away(0, 7) == 0);
}

TEST_CASE("shape inference") {
  auto net = test::fixture_net("tiny_cnn");
  CHECK(net.layers[0].out_shape == Shape{8, 16, 16});
  CHECK(net.layers[4].out_shape == Shape{16, 8, 8});
  CHECK(net.layers[5].out_shape == Shape{10, 1, 1});
  CHECK(net.layers[5].weight_rows() == 1024);
  CHECK(net.terminal() == 5);

  auto vgg = test::fixture_net("tiny_vgg_concat");
  CHECK(vgg.layers[2].out_shape == Shape{32, 16, 16});
  CHECK(vgg.consumers(-1) == std::vector<int>{0, 1});
}

TEST_CASE("network errors") {
  CHECK_THROWS_AS(parse_network("{"), NetworkError);
  CHECK_THROWS_AS(parse_network(minimal(R"({"type":"fc","out_features":2})")), NetworkError);  // no weights
  CHECK_THROWS_AS(parse_network(minimal(R"({"type":"fc","out_features":2,"weight_seed":1,"weight_file":"x",
                                            "quant":{"multiplier":1,"shift":0}})")),
                  NetworkError);
  CHECK_THROWS_AS(parse_network(minimal(R"({"type":"softmax"})")), NetworkError);
  CHECK_THROWS_AS(parse_network(minimal(R"({"type":"relu","bogus":1})")), NetworkError);
  // add with mismatched shapes
  CHECK_THROWS_AS(parse_network(minimal(R"({"type":"fc","out_features":3,"weight_seed":1,"quant":{"multiplier":1,"shift":0}},
                                            {"type":"add","producers":[-1,0]})")),
                  NetworkError);
  // two terminal layers
  CHECK_THROWS_AS(parse_network(minimal(R"({"type":"relu"},{"type":"relu","producers":[-1]})")), NetworkError);
  // kernel larger than input
  CHECK_THROWS_AS(parse_network(minimal(R"({"type":"pool","kernel":3})", "[1,2,2]")), NetworkError);
}

TEST_CASE("reference model rejects wrong input size") {
  auto net = test::fixture_net("mlp3");
  std::vector<std::int8_t> in(63);
  CHECK_THROWS_AS(reference_inference(net, in), NetworkError);
}

TEST_CASE("seed override") {
  auto net = test::fixture_net("tiny_cnn");
  override_seeds(net, 1000);
  CHECK(net.input_seed == 1000);
  CHECK(*net.layers[0].weight_seed == 1000);
  CHECK(*net.layers[2].weight_seed == 1002);
}

// Golden outputs from tests/oracle/reference_oracle.py (independent model), frozen.
TEST_CASE("reference model agrees with the independent oracle") {
  struct Golden {
    const char* net;
    std::vector<int> out;
  };
  const std::vector<Golden> golden = {
      {"mlp3", {14, 12, 7, 1, 20, 12, 15, 2, -6, -13}},
      {"tiny_cnn", {14, -16, 4, 1, -12, -6, -7, -8, -40, -20}},
      {"tiny_resnet", {-37, 6, 7, -40, 37, 9, -39, 33, -44, 17}},
      {"tiny_vgg_concat", {-2, 4, 2, -1, -20, -10, -11, 2, -2, -3}},
  };
  for (const auto& g : golden) {
    auto net = test::fixture_net(g.net);
    auto out = reference_inference(net, default_input(net));
    CAPTURE(g.net);
    REQUIRE(out.size() == g.out.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(int{out[i]} == g.out[i]);
  }
}
