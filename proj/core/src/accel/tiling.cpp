#include "nvsim/accel/tiling.hpp"

#include <algorithm>
#include <cmath>

namespace nvsim::accel {

namespace {

constexpr std::uint64_t round_atom(std::uint64_t v) noexcept { return (v + kAtom - 1) / kAtom * kAtom; }
constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) noexcept { return (a + b - 1) / b; }

}  // namespace

void validate(const AccelConfig& cfg) {
  if (cfg.num_macs == 0) throw std::invalid_argument("accel.num_macs must be positive");
  if (cfg.buffer_bytes == 0) throw std::invalid_argument("accel.buffer_bytes must be positive");
  if (cfg.min_burst == 0 || cfg.min_burst % kAtom != 0 || cfg.max_burst % kAtom != 0)
    throw std::invalid_argument("accel bursts must be positive multiples of 32");
  if (cfg.min_burst > cfg.max_burst) throw std::invalid_argument("accel.min_burst exceeds max_burst");
  if (!(cfg.compute_efficiency > 0.0 && cfg.compute_efficiency <= 1.0))
    throw std::invalid_argument("accel.compute_efficiency must be in (0, 1]");
  if (cfg.max_outstanding == 0) throw std::invalid_argument("accel.max_outstanding must be positive");
}

LayerTooLarge::LayerTooLarge(const LayerDescriptor& l, std::uint64_t need, std::uint64_t buffer)
    : std::runtime_error("layer " + std::to_string(l.index) + ": smallest tile needs " + std::to_string(need) +
                         " bytes, buffer holds " + std::to_string(buffer)) {}

std::uint64_t surface_bytes(Dims d) noexcept { return round_atom(d.c) * d.h * d.w; }

Dims TensorRef::dims() const noexcept {
  if (parts.empty()) return {};
  Dims d{parts.front().dims.h, parts.front().dims.w, 0};
  for (const Part& p : parts) d.c += p.dims.c;
  return d;
}

LayerMemory isolated_memory(const LayerDescriptor& layer) {
  LayerMemory m;
  m.weights = 0;
  m.input.parts.push_back({0x1000'0000, layer.in});
  m.output.parts.push_back({0x2000'0000, layer.out});
  return m;
}

std::uint64_t TileSchedule::total_macs() const noexcept {
  std::uint64_t s = 0;
  for (const Tile& t : tiles) s += t.mac_count;
  return s;
}

std::uint64_t layer_macs(const LayerDescriptor& layer) {
  if (workload::default_placement(layer.kind) != workload::Placement::Accel) throw UnsupportedLayer(layer, "the accelerator");
  return workload::conv_macs(layer);
}

TileSchedule tile_layer(const LayerDescriptor& layer, const AccelConfig& cfg) {
  return tile_layer(layer, cfg, isolated_memory(layer));
}

TileSchedule tile_layer(const LayerDescriptor& layer, const AccelConfig& cfg, const LayerMemory& mem) {
  layer_macs(layer);  // placement check
  TileSchedule sched;
  sched.layer = layer.index;
  sched.kind = layer.kind;
  if (layer.kind != LayerKind::Conv && layer.kind != LayerKind::Pool) return sched;
  if (mem.input.dims() != layer.in || mem.output.dims() != layer.out)
    throw std::invalid_argument("layer " + std::to_string(layer.index) + ": memory plan does not match shape");

  const bool conv = layer.kind == LayerKind::Conv;
  const Dims in = layer.in, out = layer.out;
  const std::uint32_t K = layer.k, S = layer.s, pad = (K - 1) / 2;

  std::uint64_t row_bytes = 0;
  for (const auto& p : mem.input.parts) row_bytes += round_atom(p.dims.c) * p.dims.w;
  auto input_rows = [&](std::uint64_t r) { return std::min<std::uint64_t>(in.h, (r - 1) * S + K); };
  const std::uint64_t per_channel = conv ? std::uint64_t{K} * K * in.c : 0;
  auto weights = [&](std::uint64_t ch) { return round_atom(ch) * per_channel; };

  // Channel groups: as wide as the buffer allows with one output row of input.
  const std::uint64_t min_input = input_rows(1) * row_bytes;
  const std::uint64_t c_pad = round_atom(out.c);
  std::uint64_t group = c_pad;
  if (conv && weights(group) + min_input > cfg.buffer_bytes) {
    const std::uint64_t room = cfg.buffer_bytes > min_input ? cfg.buffer_bytes - min_input : 0;
    group = room / (per_channel * kAtom) * kAtom;
    if (group == 0) throw LayerTooLarge(layer, weights(kAtom) + min_input, cfg.buffer_bytes);
    group = round_atom(ceil_div(c_pad, ceil_div(c_pad, group)));
  }
  if (weights(group) + min_input > cfg.buffer_bytes)
    throw LayerTooLarge(layer, weights(group) + min_input, cfg.buffer_bytes);

  // Row tiles: as many output rows as fit next to the group's weights.
  const std::uint64_t rows_fit = (cfg.buffer_bytes - weights(group)) / row_bytes;
  std::uint64_t rows = rows_fit >= in.h ? out.h : (rows_fit - K) / S + 1;
  rows = std::clamp<std::uint64_t>(rows, 1, out.h);
  rows = ceil_div(out.h, ceil_div(out.h, rows));

  const std::uint64_t out_surface = std::uint64_t{out.h} * out.w * kAtom;
  const TensorRef::Part& dst = mem.output.parts.front();

  std::uint32_t g = 0;
  for (std::uint64_t c0 = 0; c0 < out.c; c0 += group, ++g) {
    const std::uint64_t c1 = std::min<std::uint64_t>(out.c, c0 + group);
    bool resident = false;
    for (std::uint64_t r0 = 0; r0 < out.h; r0 += rows) {
      const std::uint64_t r1 = std::min<std::uint64_t>(out.h, r0 + rows);
      Tile t;
      t.group = g;
      t.row_begin = static_cast<std::uint32_t>(r0);
      t.row_end = static_cast<std::uint32_t>(r1);
      t.ch_begin = static_cast<std::uint32_t>(c0);
      t.ch_end = static_cast<std::uint32_t>(c1);
      t.resident_weight_bytes = weights(c1 - c0);
      if (conv && !resident) {
        t.weight_reads.push_back({mem.weights + c0 * per_channel, t.resident_weight_bytes});
        t.weight_bytes = t.resident_weight_bytes;
      }
      resident = true;

      const std::uint64_t lo = r0 * S > pad ? r0 * S - pad : 0;
      const std::uint64_t hi = std::min<std::uint64_t>(in.h, (r1 - 1) * S + K - pad);
      for (const auto& p : mem.input.parts) {
        const std::uint64_t surf = std::uint64_t{p.dims.h} * p.dims.w * kAtom;
        for (std::uint64_t s = 0; s < ceil_div(p.dims.c, kAtom); ++s) {
          const Segment seg{p.base + s * surf + lo * p.dims.w * kAtom, (hi - lo) * p.dims.w * kAtom};
          t.input_reads.push_back(seg);
          t.input_bytes += seg.bytes;
        }
      }
      for (std::uint64_t s = c0 / kAtom; s < ceil_div(c1, kAtom); ++s) {
        const Segment seg{dst.base + s * out_surface + r0 * out.w * kAtom, (r1 - r0) * out.w * kAtom};
        t.output_writes.push_back(seg);
        t.output_bytes += seg.bytes;
      }
      t.mac_count = conv ? per_channel * (c1 - c0) * (r1 - r0) * out.w : 0;
      sched.tiles.push_back(std::move(t));
    }
  }
  return sched;
}

std::vector<BurstTemplate> gen_traffic(const TileSchedule& sched, const AccelConfig& cfg) {
  std::vector<BurstTemplate> out;
  auto emit = [&](const std::vector<Segment>& segs, memsys::Access kind, Region region, std::uint32_t tile) {
    for (const Segment& s : segs) {
      std::uint64_t addr = s.addr;
      std::uint64_t left = round_atom(s.bytes);
      while (left > 0) {
        const auto size = static_cast<std::uint32_t>(std::min<std::uint64_t>(left, cfg.max_burst));
        out.push_back({kind, addr, std::max(size, cfg.min_burst), tile, region});
        addr += size;
        left -= std::min<std::uint64_t>(left, size);
      }
    }
  };
  for (std::uint32_t i = 0; i < sched.tiles.size(); ++i) {
    const Tile& t = sched.tiles[i];
    emit(t.weight_reads, memsys::Access::Read, Region::Weight, i);
    emit(t.input_reads, memsys::Access::Read, Region::Input, i);
    emit(t.output_writes, memsys::Access::Write, Region::Output, i);
  }
  return out;
}

std::uint64_t compute_cycles(const Tile& tile, const AccelConfig& cfg) {
  if (tile.mac_count == 0) return ceil_div(tile.output_bytes, kAtom);
  const double rate = cfg.num_macs * cfg.compute_efficiency;
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(tile.mac_count) / rate - 1e-9));
}

}  // namespace nvsim::accel
