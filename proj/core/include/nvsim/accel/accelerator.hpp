#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "nvsim/accel/tiling.hpp"
#include "nvsim/kernel/model.hpp"
#include "nvsim/memsys/transaction.hpp"

namespace nvsim::accel {

/// One accelerator layer ready to execute: its tiles, their burst traffic
/// and per-tile compute cost.
struct LayerJob {
  std::size_t layer = 0;
  TileSchedule schedule;
  std::vector<BurstTemplate> bursts;
  struct TileSpan {
    std::uint32_t read_begin = 0, read_end = 0;
    std::uint32_t write_begin = 0, write_end = 0;
    std::uint64_t compute = 0;
  };
  std::vector<TileSpan> spans;

  std::uint64_t compute_total() const noexcept;
};

LayerJob make_job(const LayerDescriptor& layer, const AccelConfig& cfg, const LayerMemory& mem);

/// Address plan for a whole network: every layer output gets its own region,
/// Route outputs alias their inputs and Shortcut outputs alias the previous
/// layer (modelled as free).
struct NetworkMemory {
  std::vector<LayerMemory> layers;
  std::uint64_t weight_bytes = 0;
  std::uint64_t activation_bytes = 0;
};

inline constexpr std::uint64_t kWeightBase = 0x0;
inline constexpr std::uint64_t kActivationBase = 0x4000'0000;

NetworkMemory plan_memory(const workload::Network& net);

/// Jobs for every accelerator layer that moves data (Conv and Pool).
std::vector<LayerJob> make_jobs(const workload::Network& net, const AccelConfig& cfg);

struct LayerResult {
  std::size_t layer = 0;
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  std::uint64_t compute = 0;
  /// Cycles before the first tile started computing.
  std::uint64_t fill = 0;
  /// Cycles after the last tile finished computing.
  std::uint64_t drain = 0;
  std::uint64_t macs = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;

  std::uint64_t total() const noexcept { return end - start; }
  std::uint64_t memory() const noexcept { return total() - compute; }
  /// Compute idle time between tiles.
  std::uint64_t stall() const noexcept { return total() - compute - fill - drain; }
};

struct TraceRecord {
  std::size_t layer = 0;
  std::uint32_t tile = 0;
  memsys::Access kind = memsys::Access::Read;
  std::uint64_t addr = 0;
  std::uint32_t size = 0;
  std::uint64_t issue = 0;
  std::uint64_t complete = 0;
};

/// Accelerator engine as a clocked black box. Each edge accepts at most one
/// memory response and emits at most one request. Tile t+1 may be fetched
/// while tile t computes (two buffer halves); tile t computes once all its
/// reads have returned; its writes are queued when compute ends. A layer
/// completes when every write is acknowledged; the next starts on the
/// following edge.
class AcceleratorCore final : public kernel::ClockedBlackBox<memsys::MemTransaction, memsys::MemTransaction> {
 public:
  AcceleratorCore(const AccelConfig& cfg, std::vector<LayerJob> jobs);

  std::optional<memsys::MemTransaction> clock_edge(std::optional<memsys::MemTransaction> in) override;

  bool done() const noexcept { return job_ >= jobs_.size(); }
  std::uint64_t edges() const noexcept { return now_; }
  const std::vector<LayerResult>& results() const noexcept { return results_; }
  std::size_t outstanding() const noexcept { return outstanding_; }

  /// Holds the first layer back until edge `cycle`.
  void start_at(std::uint64_t cycle) noexcept { start_at_ = cycle; }
  void keep_trace(bool on) { trace_on_ = on; }
  const std::vector<TraceRecord>& trace() const noexcept { return trace_; }
  void on_layer_done(std::function<void(const LayerResult&)> cb) { callback_ = std::move(cb); }

 private:
  void start_layer();
  std::optional<memsys::MemTransaction> issue(std::uint64_t now);

  AccelConfig cfg_;
  std::vector<LayerJob> jobs_;
  std::size_t job_ = 0;
  std::uint64_t now_ = 0;
  std::uint64_t start_at_ = 0;

  std::uint32_t fetch_tile_ = 0;
  std::uint32_t fetch_pos_ = 0;
  std::vector<std::uint32_t> reads_done_;
  std::uint32_t computed_ = 0;
  bool computing_ = false;
  std::uint64_t compute_end_ = 0;
  std::vector<std::uint32_t> write_queue_;
  std::size_t write_head_ = 0;
  std::uint32_t writes_done_ = 0;
  std::uint32_t writes_total_ = 0;
  std::size_t outstanding_ = 0;
  bool prefer_write_ = false;
  bool started_ = false;
  bool first_compute_ = true;
  LayerResult cur_{};

  bool trace_on_ = false;
  std::vector<TraceRecord> trace_;
  std::vector<std::size_t> trace_index_;
  std::vector<LayerResult> results_;
  std::function<void(const LayerResult&)> callback_;
};

/// Lower bound of an accelerator run: every tile computes back to back with
/// no memory time.
std::uint64_t ideal_cycles(const std::vector<LayerJob>& jobs) noexcept;

}  // namespace nvsim::accel
