#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pimsim/error.hpp"

namespace pimsim {

/// Activation shape, channels-first. Vectors are (n, 1, 1).
struct Shape {
  int c = 1;
  int h = 1;
  int w = 1;
  std::int64_t numel() const { return std::int64_t{c} * h * w; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

enum class LayerKind { Conv, FC, Pool, ReLU, Add, Concat };
enum class PoolKind { Max, Avg };

std::string_view kind_name(LayerKind k);

/// Fixed-point requantization: q(x) = clamp(round_half_away(x * multiplier / 2^shift)).
struct QuantParams {
  std::int32_t multiplier = 1;
  int shift = 0;
  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

/// The single rounding rule shared by VSCALE and the reference model.
std::int8_t requantize(std::int32_t acc, std::int32_t multiplier, int shift);

/// Division of an integer sum by a positive count, rounding half away from zero.
std::int64_t div_round_half_away(std::int64_t num, std::int64_t den);

inline std::int8_t saturate_int8(std::int64_t v) {
  return static_cast<std::int8_t>(v < -128 ? -128 : v > 127 ? 127 : v);
}

struct Layer {
  int id = 0;
  LayerKind kind = LayerKind::ReLU;
  std::vector<int> producers;  // -1 = network input

  int out_channels = 0;  // Conv: output channels; FC: out_features
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  PoolKind pool = PoolKind::Max;
  QuantParams quant;

  std::optional<std::uint64_t> weight_seed;
  std::string weight_file;           // as written in the document
  std::vector<std::int8_t> weight_data;  // loaded contents of weight_file

  Shape in_shape;   // shape of producers[0]
  Shape out_shape;  // inferred

  bool has_weights() const { return kind == LayerKind::Conv || kind == LayerKind::FC; }
  /// Logical weight matrix geometry: rows = C*kh*kw (conv) or in_features (fc).
  int weight_rows() const;
  int weight_cols() const;
};

struct Network {
  std::string name;
  Shape input_shape;
  std::uint64_t input_seed = 0;
  std::vector<Layer> layers;

  int terminal() const;
  std::vector<int> consumers(int layer_id) const;  // layer ids consuming `layer_id` (-1 = input)
  const Shape& shape_of(int producer) const {
    return producer < 0 ? input_shape : layers[static_cast<std::size_t>(producer)].out_shape;
  }
};

class NetworkError : public Error {
 public:
  NetworkError(std::string path, const std::string& message)
      : Error("network error" + (path.empty() ? std::string() : " at '" + path + "'") + ": " + message),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Parses the JSON network description; `base_dir` resolves weight_file paths.
Network parse_network(std::string_view text, const std::filesystem::path& base_dir = {});
Network load_network(const std::filesystem::path& path);

/// Re-seeds every seeded layer: seed = base + layer id. Input seed becomes base.
void override_seeds(Network& net, std::uint64_t base);

/// SplitMix64 output stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Row-major rows x cols int8 matrix; element k takes the top byte of the k-th output.
std::vector<std::int8_t> generate_weights(std::uint64_t seed, int rows, int cols);

/// The layer's logical weight matrix (row-major weight_rows() x weight_cols()).
std::vector<std::int8_t> layer_weights(const Layer& layer);

/// Network input derived from input_seed (CHW order).
std::vector<std::int8_t> default_input(const Network& net);

/// Exact integer inference. Input and output are CHW int8 tensors.
std::vector<std::int8_t> reference_inference(const Network& net, std::span<const std::int8_t> input);

}  // namespace pimsim
