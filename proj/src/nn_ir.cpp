#include "pimsim/nn_ir.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pimsim {

using json = nlohmann::json;

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.c) + "," + std::to_string(s.h) + "," + std::to_string(s.w) + ")";
}

std::string_view kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::FC: return "fc";
    case LayerKind::Pool: return "pool";
    case LayerKind::ReLU: return "relu";
    case LayerKind::Add: return "add";
    case LayerKind::Concat: return "concat";
  }
  return "?";
}

std::int64_t div_round_half_away(std::int64_t num, std::int64_t den) {
  std::int64_t mag = num < 0 ? -num : num;
  std::int64_t q = (2 * mag + den) / (2 * den);
  return num < 0 ? -q : q;
}

std::int8_t requantize(std::int32_t acc, std::int32_t multiplier, int shift) {
  std::int64_t scaled = std::int64_t{acc} * multiplier;
  std::int64_t mag = scaled < 0 ? -scaled : scaled;
  std::int64_t half = shift > 0 ? (std::int64_t{1} << (shift - 1)) : 0;
  std::int64_t q = (mag + half) >> shift;
  return saturate_int8(scaled < 0 ? -q : q);
}

int Layer::weight_rows() const {
  if (kind == LayerKind::Conv) return in_shape.c * kernel_h * kernel_w;
  if (kind == LayerKind::FC) return static_cast<int>(in_shape.numel());
  return 0;
}

int Layer::weight_cols() const {
  return (kind == LayerKind::Conv || kind == LayerKind::FC) ? out_channels : 0;
}

int Network::terminal() const {
  std::vector<bool> consumed(layers.size(), false);
  for (const auto& l : layers)
    for (int p : l.producers)
      if (p >= 0) consumed[static_cast<std::size_t>(p)] = true;
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (!consumed[i]) return static_cast<int>(i);
  return -1;
}

std::vector<int> Network::consumers(int layer_id) const {
  std::vector<int> out;
  for (const auto& l : layers) {
    for (int p : l.producers) {
      if (p == layer_id) {
        out.push_back(l.id);
        break;
      }
    }
  }
  return out;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw NetworkError(path, msg); }

int get_int(const json& obj, const std::string& key, const std::string& path, std::optional<int> def,
            int min_value) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (!def) fail(path + "." + key, "missing required field");
    return *def;
  }
  if (!it->is_number_integer()) fail(path + "." + key, "expected an integer");
  std::int64_t v = it->get<std::int64_t>();
  if (v < min_value || v > std::numeric_limits<int>::max())
    fail(path + "." + key, "must be >= " + std::to_string(min_value));
  return static_cast<int>(v);
}

// "kernel": 3 or [3, 3]
std::pair<int, int> get_kernel(const json& obj, const std::string& path) {
  auto it = obj.find("kernel");
  if (it == obj.end()) fail(path + ".kernel", "missing required field");
  if (it->is_number_integer()) {
    int k = get_int(obj, "kernel", path, std::nullopt, 1);
    return {k, k};
  }
  if (it->is_array() && it->size() == 2 && (*it)[0].is_number_integer() &&
      (*it)[1].is_number_integer()) {
    std::int64_t kh = (*it)[0].get<std::int64_t>();
    std::int64_t kw = (*it)[1].get<std::int64_t>();
    if (kh < 1 || kw < 1 || kh > std::numeric_limits<int>::max() || kw > std::numeric_limits<int>::max())
      fail(path + ".kernel", "kernel dims must be >= 1");
    return {static_cast<int>(kh), static_cast<int>(kw)};
  }
  fail(path + ".kernel", "expected an integer or [kh, kw]");
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) fail(path + "." + key, "unknown field");
}

QuantParams get_quant(const json& obj, const std::string& path) {
  auto it = obj.find("quant");
  if (it == obj.end()) fail(path + ".quant", "missing required field");
  if (!it->is_object()) fail(path + ".quant", "expected an object");
  check_keys(*it, {"multiplier", "shift"}, path + ".quant");
  QuantParams q;
  q.multiplier = get_int(*it, "multiplier", path + ".quant", std::nullopt, 0);
  q.shift = get_int(*it, "shift", path + ".quant", std::nullopt, 0);
  if (q.shift > 31) fail(path + ".quant.shift", "must be in [0, 31]");
  return q;
}

std::vector<std::int8_t> read_bytes(const std::filesystem::path& p, const std::string& path) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(path, "cannot open weight file '" + p.string() + "'");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return {raw.begin(), raw.end()};
}

int conv_dim(int in, int pad, int k, int stride, const std::string& path) {
  int span = in + 2 * pad - k;
  if (span < 0) fail(path, "kernel larger than padded input; output dimension would be non-positive");
  return span / stride + 1;
}

}  // namespace

Network parse_network(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw NetworkError("", std::string("syntax error: ") + e.what());
  }
  if (!root.is_object()) fail("", "top level must be an object");
  check_keys(root, {"name", "input_shape", "input_seed", "layers"}, "");

  Network net;
  auto name = root.find("name");
  if (name == root.end() || !name->is_string()) fail("name", "expected a string");
  net.name = name->get<std::string>();

  auto shape = root.find("input_shape");
  if (shape == root.end() || !shape->is_array() || (shape->size() != 1 && shape->size() != 3))
    fail("input_shape", "expected [n] or [c, h, w]");
  std::vector<int> dims;
  for (const auto& d : *shape) {
    if (!d.is_number_integer() || d.get<std::int64_t>() < 1 ||
        d.get<std::int64_t>() > std::numeric_limits<int>::max())
      fail("input_shape", "dimensions must be positive integers");
    dims.push_back(d.get<int>());
  }
  net.input_shape = dims.size() == 1 ? Shape{dims[0], 1, 1} : Shape{dims[0], dims[1], dims[2]};

  if (auto seed = root.find("input_seed"); seed != root.end()) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0))
      fail("input_seed", "expected a non-negative integer");
    net.input_seed = seed->get<std::uint64_t>();
  }

  auto layers = root.find("layers");
  if (layers == root.end() || !layers->is_array() || layers->empty())
    fail("layers", "expected a non-empty array");

  for (std::size_t i = 0; i < layers->size(); ++i) {
    const json& lj = (*layers)[i];
    std::string path = "layers[" + std::to_string(i) + "]";
    if (!lj.is_object()) fail(path, "expected an object");
    Layer layer;
    layer.id = static_cast<int>(i);
    if (auto id = lj.find("id"); id != lj.end()) {
      if (!id->is_number_integer() || id->get<std::int64_t>() != static_cast<std::int64_t>(i))
        fail(path + ".id", "layer ids must equal their position (layers are in topological order)");
    }
    auto type = lj.find("type");
    if (type == lj.end() || !type->is_string()) fail(path + ".type", "expected a string");
    std::string t = type->get<std::string>();

    std::set<std::string> common = {"id", "type", "producers"};
    auto allow = [&](std::initializer_list<std::string> extra) {
      std::set<std::string> s = common;
      s.insert(extra.begin(), extra.end());
      check_keys(lj, s, path);
    };
    if (t == "conv") {
      layer.kind = LayerKind::Conv;
      allow({"out_channels", "kernel", "stride", "padding", "quant", "weight_seed", "weight_file"});
      layer.out_channels = get_int(lj, "out_channels", path, std::nullopt, 1);
      std::tie(layer.kernel_h, layer.kernel_w) = get_kernel(lj, path);
      layer.stride = get_int(lj, "stride", path, 1, 1);
      layer.padding = get_int(lj, "padding", path, 0, 0);
      layer.quant = get_quant(lj, path);
    } else if (t == "fc") {
      layer.kind = LayerKind::FC;
      allow({"out_features", "quant", "weight_seed", "weight_file"});
      layer.out_channels = get_int(lj, "out_features", path, std::nullopt, 1);
      layer.quant = get_quant(lj, path);
    } else if (t == "pool") {
      layer.kind = LayerKind::Pool;
      allow({"kind", "kernel", "stride"});
      std::string kind = "max";
      if (auto k = lj.find("kind"); k != lj.end()) {
        if (!k->is_string()) fail(path + ".kind", "expected \"max\" or \"avg\"");
        kind = k->get<std::string>();
      }
      if (kind == "max") layer.pool = PoolKind::Max;
      else if (kind == "avg") layer.pool = PoolKind::Avg;
      else fail(path + ".kind", "expected \"max\" or \"avg\"");
      std::tie(layer.kernel_h, layer.kernel_w) = get_kernel(lj, path);
      layer.stride = get_int(lj, "stride", path, layer.kernel_h, 1);
    } else if (t == "relu") {
      layer.kind = LayerKind::ReLU;
      allow({});
    } else if (t == "add") {
      layer.kind = LayerKind::Add;
      allow({});
    } else if (t == "concat") {
      layer.kind = LayerKind::Concat;
      allow({});
    } else {
      fail(path + ".type", "unknown layer type '" + t + "'");
    }

    if (auto prods = lj.find("producers"); prods != lj.end()) {
      if (!prods->is_array()) fail(path + ".producers", "expected an array of layer ids");
      for (const auto& p : *prods) {
        if (!p.is_number_integer()) fail(path + ".producers", "expected integer layer ids");
        std::int64_t id = p.get<std::int64_t>();
        if (id < -1 || id >= static_cast<std::int64_t>(i))
          fail(path + ".producers", "producer " + std::to_string(id) +
                                        " must be -1 (input) or an earlier layer id");
        layer.producers.push_back(static_cast<int>(id));
      }
    } else {
      layer.producers.push_back(static_cast<int>(i) - 1);
    }

    std::size_t np = layer.producers.size();
    bool arity_ok = layer.kind == LayerKind::Add      ? np == 2
                    : layer.kind == LayerKind::Concat ? np >= 2
                                                      : np == 1;
    if (!arity_ok) fail(path + ".producers", "wrong number of producers for " + t);

    if (layer.has_weights()) {
      auto seed = lj.find("weight_seed");
      auto file = lj.find("weight_file");
      if ((seed == lj.end()) == (file == lj.end()))
        fail(path, "exactly one of weight_seed or weight_file is required");
      if (seed != lj.end()) {
        if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0))
          fail(path + ".weight_seed", "expected a non-negative integer");
        layer.weight_seed = seed->get<std::uint64_t>();
      } else {
        if (!file->is_string()) fail(path + ".weight_file", "expected a string");
        layer.weight_file = file->get<std::string>();
      }
    }

    // Shape inference.
    layer.in_shape = net.shape_of(layer.producers[0]);
    const Shape& in = layer.in_shape;
    switch (layer.kind) {
      case LayerKind::Conv:
        layer.out_shape = {layer.out_channels,
                           conv_dim(in.h, layer.padding, layer.kernel_h, layer.stride, path),
                           conv_dim(in.w, layer.padding, layer.kernel_w, layer.stride, path)};
        break;
      case LayerKind::FC:
        layer.out_shape = {layer.out_channels, 1, 1};
        break;
      case LayerKind::Pool:
        layer.out_shape = {in.c, conv_dim(in.h, 0, layer.kernel_h, layer.stride, path),
                           conv_dim(in.w, 0, layer.kernel_w, layer.stride, path)};
        break;
      case LayerKind::ReLU:
        layer.out_shape = in;
        break;
      case LayerKind::Add: {
        const Shape& other = net.shape_of(layer.producers[1]);
        if (!(other == in))
          fail(path, "shape mismatch: add producers have shapes " + to_string(in) + " and " +
                         to_string(other));
        layer.out_shape = in;
        break;
      }
      case LayerKind::Concat: {
        Shape out = in;
        for (std::size_t k = 1; k < np; ++k) {
          const Shape& s = net.shape_of(layer.producers[k]);
          if (s.h != in.h || s.w != in.w)
            fail(path, "shape mismatch: concat producers " + to_string(in) + " and " + to_string(s) +
                           " differ spatially");
          out.c += s.c;
        }
        layer.out_shape = out;
        break;
      }
    }

    if (!layer.weight_file.empty()) {
      std::filesystem::path p = layer.weight_file;
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      layer.weight_data = read_bytes(p, path + ".weight_file");
      std::size_t want = static_cast<std::size_t>(layer.weight_rows()) * layer.weight_cols();
      if (layer.weight_data.size() != want)
        fail(path + ".weight_file", "expected " + std::to_string(want) + " bytes, file has " +
                                        std::to_string(layer.weight_data.size()));
    }
    net.layers.push_back(std::move(layer));
  }

  int terminals = 0;
  for (const auto& l : net.layers)
    if (net.consumers(l.id).empty()) ++terminals;
  if (terminals != 1)
    fail("layers", "network must have exactly one terminal layer (found " + std::to_string(terminals) + ")");
  return net;
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open network file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str(), path.parent_path());
}

void override_seeds(Network& net, std::uint64_t base) {
  net.input_seed = base;
  for (auto& l : net.layers)
    if (l.weight_seed) l.weight_seed = base + static_cast<std::uint64_t>(l.id);
}

std::vector<std::int8_t> generate_weights(std::uint64_t seed, int rows, int cols) {
  SplitMix64 rng(seed);
  std::vector<std::int8_t> out(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (auto& v : out) v = static_cast<std::int8_t>(static_cast<std::uint8_t>(rng.next() >> 56));
  return out;
}

std::vector<std::int8_t> layer_weights(const Layer& layer) {
  if (!layer.has_weights()) return {};
  if (layer.weight_seed) return generate_weights(*layer.weight_seed, layer.weight_rows(), layer.weight_cols());
  return layer.weight_data;
}

std::vector<std::int8_t> default_input(const Network& net) {
  return generate_weights(net.input_seed, 1, static_cast<int>(net.input_shape.numel()));
}

}  // namespace pimsim
