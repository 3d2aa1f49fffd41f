#include "pimsim/compiler.hpp"

namespace pimsim {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

std::string_view strategy_name(Strategy s) {
  return s == Strategy::UtilizationFirst ? "utilization" : "performance";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
  if (s == "utilization" || s == "utilization-first") return Strategy::UtilizationFirst;
  if (s == "performance" || s == "performance-first") return Strategy::PerformanceFirst;
  return std::nullopt;
}

Tiling tile_matrix(int rows, int cols, const ArchConfig& cfg, int layer_id) {
  if (rows < 1 || cols < 1) throw Error("tile_matrix: matrix dimensions must be >= 1");
  Tiling t;
  t.layer_id = layer_id;
  t.matrix_rows = rows;
  t.matrix_cols = cols;
  t.row_blocks = ceil_div(rows, cfg.xbar_rows);
  t.col_blocks = ceil_div(cols, cfg.xbar_cols);
  for (int rb = 0; rb < t.row_blocks; ++rb) {
    for (int cb = 0; cb < t.col_blocks; ++cb) {
      Tile tile;
      tile.row_block = rb;
      tile.col_block = cb;
      tile.rows_used = std::min(cfg.xbar_rows, rows - rb * cfg.xbar_rows);
      tile.cols_used = std::min(cfg.xbar_cols, cols - cb * cfg.xbar_cols);
      t.tiles.push_back(tile);
    }
  }
  return t;
}

std::vector<Tiling> tile_network(const Network& net, const ArchConfig& cfg) {
  std::vector<Tiling> out;
  for (const Layer& l : net.layers) {
    if (l.has_weights()) {
      out.push_back(tile_matrix(l.weight_rows(), l.weight_cols(), cfg, l.id));
    } else if (l.kind == LayerKind::Pool && l.pool == PoolKind::Avg) {
      const int c = l.in_shape.c;
      out.push_back(tile_matrix(c * l.kernel_h * l.kernel_w, c, cfg, l.id));
    }
  }
  return out;
}

QuantParams average_quant(int count) {
  if (count < 1) throw Error("average_quant: count must be >= 1");
  if (count == 1) return {1, 0};
  // ceil(2^31 / n) keeps the product error below half an LSB for |sum| <= 128 n.
  const std::int64_t m = ((std::int64_t{1} << 31) + count - 1) / count;
  return {static_cast<std::int32_t>(m), 31};
}

}  // namespace pimsim
