#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvsim/memsys/transaction.hpp"
#include "nvsim/workload/network.hpp"

namespace nvsim::accel {

using workload::Dims;
using workload::LayerDescriptor;
using workload::LayerKind;

struct AccelConfig {
  std::uint32_t num_macs = 2048;
  std::uint64_t buffer_bytes = 512 * 1024;
  std::uint32_t min_burst = 32;
  std::uint32_t max_burst = 256;
  double compute_efficiency = 0.5;
  /// DMA requests in flight before the engine stops issuing.
  std::uint32_t max_outstanding = 16;
};

void validate(const AccelConfig& cfg);

using workload::UnsupportedLayer;

class LayerTooLarge final : public std::runtime_error {
 public:
  LayerTooLarge(const LayerDescriptor& l, std::uint64_t need, std::uint64_t buffer);
};

/// Feature maps are stored as 32-channel surfaces, [ceil(C/32)][H][W][32],
/// one byte per element with the last surface zero-padded; weights are stored
/// per output channel, padded to a multiple of 32 output channels.
inline constexpr std::uint32_t kAtom = 32;
std::uint64_t surface_bytes(Dims d) noexcept;

/// A feature map in memory. A concatenation (route) is several parts laid
/// out independently; channel order follows the parts.
struct TensorRef {
  struct Part {
    std::uint64_t base = 0;
    Dims dims{};
  };
  std::vector<Part> parts;

  Dims dims() const noexcept;
};

/// Where one accelerator layer finds its operands.
struct LayerMemory {
  std::uint64_t weights = 0;
  TensorRef input;
  TensorRef output;
};

/// Default placement for a layer studied in isolation.
LayerMemory isolated_memory(const LayerDescriptor& layer);

struct Segment {
  std::uint64_t addr = 0;
  std::uint64_t bytes = 0;
  bool operator==(const Segment&) const = default;
};

struct Tile {
  std::uint32_t group = 0;
  std::uint32_t row_begin = 0;
  std::uint32_t row_end = 0;
  std::uint32_t ch_begin = 0;
  std::uint32_t ch_end = 0;
  /// Weights fetched for this tile; zero when they stay resident from the
  /// previous tile of the same channel group.
  std::uint64_t weight_bytes = 0;
  std::uint64_t resident_weight_bytes = 0;
  std::uint64_t input_bytes = 0;
  std::uint64_t output_bytes = 0;
  std::uint64_t mac_count = 0;
  std::vector<Segment> weight_reads;
  std::vector<Segment> input_reads;
  std::vector<Segment> output_writes;
};

struct TileSchedule {
  std::size_t layer = 0;
  LayerKind kind = LayerKind::Conv;
  std::vector<Tile> tiles;

  std::uint64_t total_macs() const noexcept;
};

/// K*K*Cin*Cout*Hout*Wout for Conv; 0 for Pool, Route and Shortcut.
/// Throws UnsupportedLayer for CPU-placed kinds.
std::uint64_t layer_macs(const LayerDescriptor& layer);

/// Splits the layer into output-channel groups (outer) and output-row tiles
/// (inner) so that a group's weights plus a tile's input rows fit the buffer.
/// Groups are as wide as possible, so weights are fetched once per group and
/// stay resident across its row tiles. Route and Shortcut produce no tiles.
TileSchedule tile_layer(const LayerDescriptor& layer, const AccelConfig& cfg,
                        const LayerMemory& mem);
TileSchedule tile_layer(const LayerDescriptor& layer, const AccelConfig& cfg);

enum class Region : std::uint8_t { Weight, Input, Output };

struct BurstTemplate {
  memsys::Access kind = memsys::Access::Read;
  std::uint64_t addr = 0;
  std::uint32_t size = 0;
  std::uint32_t tile = 0;
  Region region = Region::Weight;
  bool operator==(const BurstTemplate&) const = default;
};

/// Per tile: weight reads, input reads, then output writes, each segment cut
/// greedily into bursts of at most max_burst bytes.
std::vector<BurstTemplate> gen_traffic(const TileSchedule& sched, const AccelConfig& cfg);

/// ceil(macs / (num_macs * efficiency)); MAC-free tiles cost one cycle per
/// 32 output bytes.
std::uint64_t compute_cycles(const Tile& tile, const AccelConfig& cfg);

}  // namespace nvsim::accel
