#include <algorithm>

#include "pimsim/nn_ir.hpp"

namespace pimsim {

namespace {

using Tensor = std::vector<std::int8_t>;

std::size_t at(const Shape& s, int c, int y, int x) {
  return (static_cast<std::size_t>(c) * s.h + y) * s.w + x;
}

Tensor conv(const Layer& l, const Tensor& in) {
  const Shape& is = l.in_shape;
  const Shape& os = l.out_shape;
  auto w = layer_weights(l);
  const int cols = l.weight_cols();
  Tensor out(static_cast<std::size_t>(os.numel()));
  for (int k = 0; k < os.c; ++k) {
    for (int oy = 0; oy < os.h; ++oy) {
      for (int ox = 0; ox < os.w; ++ox) {
        std::int32_t acc = 0;
        for (int c = 0; c < is.c; ++c) {
          for (int ky = 0; ky < l.kernel_h; ++ky) {
            int iy = oy * l.stride - l.padding + ky;
            if (iy < 0 || iy >= is.h) continue;
            for (int kx = 0; kx < l.kernel_w; ++kx) {
              int ix = ox * l.stride - l.padding + kx;
              if (ix < 0 || ix >= is.w) continue;
              std::size_t row = (static_cast<std::size_t>(c) * l.kernel_h + ky) * l.kernel_w + kx;
              acc += std::int32_t{in[at(is, c, iy, ix)]} * w[row * cols + k];
            }
          }
        }
        out[at(os, k, oy, ox)] = requantize(acc, l.quant.multiplier, l.quant.shift);
      }
    }
  }
  return out;
}

Tensor fully_connected(const Layer& l, const Tensor& in) {
  auto w = layer_weights(l);
  const int cols = l.weight_cols();
  Tensor out(static_cast<std::size_t>(cols));
  for (int j = 0; j < cols; ++j) {
    std::int32_t acc = 0;
    for (std::size_t i = 0; i < in.size(); ++i) acc += std::int32_t{in[i]} * w[i * cols + j];
    out[static_cast<std::size_t>(j)] = requantize(acc, l.quant.multiplier, l.quant.shift);
  }
  return out;
}

Tensor pool(const Layer& l, const Tensor& in) {
  const Shape& is = l.in_shape;
  const Shape& os = l.out_shape;
  Tensor out(static_cast<std::size_t>(os.numel()));
  for (int c = 0; c < os.c; ++c) {
    for (int oy = 0; oy < os.h; ++oy) {
      for (int ox = 0; ox < os.w; ++ox) {
        std::int64_t sum = 0;
        int best = -128;
        for (int ky = 0; ky < l.kernel_h; ++ky) {
          for (int kx = 0; kx < l.kernel_w; ++kx) {
            int v = in[at(is, c, oy * l.stride + ky, ox * l.stride + kx)];
            sum += v;
            best = std::max(best, v);
          }
        }
        out[at(os, c, oy, ox)] =
            l.pool == PoolKind::Max
                ? static_cast<std::int8_t>(best)
                : saturate_int8(div_round_half_away(sum, std::int64_t{l.kernel_h} * l.kernel_w));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::int8_t> reference_inference(const Network& net, std::span<const std::int8_t> input) {
  if (static_cast<std::int64_t>(input.size()) != net.input_shape.numel())
    throw NetworkError("", "shape mismatch: input has " + std::to_string(input.size()) +
                               " elements, network expects " + to_string(net.input_shape));
  Tensor net_input(input.begin(), input.end());
  std::vector<Tensor> outputs(net.layers.size());
  auto source = [&](int producer) -> const Tensor& {
    return producer < 0 ? net_input : outputs[static_cast<std::size_t>(producer)];
  };

  for (const Layer& l : net.layers) {
    const Tensor& in = source(l.producers[0]);
    Tensor out;
    switch (l.kind) {
      case LayerKind::Conv: out = conv(l, in); break;
      case LayerKind::FC: out = fully_connected(l, in); break;
      case LayerKind::Pool: out = pool(l, in); break;
      case LayerKind::ReLU:
        out = in;
        for (auto& v : out) v = std::max<std::int8_t>(v, 0);
        break;
      case LayerKind::Add: {
        const Tensor& rhs = source(l.producers[1]);
        out.resize(in.size());
        for (std::size_t i = 0; i < in.size(); ++i)
          out[i] = saturate_int8(static_cast<std::int16_t>(in[i] + rhs[i]));
        break;
      }
      case LayerKind::Concat:
        for (int p : l.producers) {
          const Tensor& t = source(p);
          out.insert(out.end(), t.begin(), t.end());
        }
        break;
    }
    outputs[static_cast<std::size_t>(l.id)] = std::move(out);
  }
  return outputs[static_cast<std::size_t>(net.terminal())];
}

}  // namespace pimsim
