#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "nvsim/memsys/transaction.hpp"

namespace nvsim::memsys {

/// Timing parameters in memory-controller clock cycles.
struct DramTimings {
  std::uint32_t tRCD = 11;
  std::uint32_t tRP = 11;
  std::uint32_t tCL = 11;
  std::uint32_t tBURST = 4;

  bool operator==(const DramTimings&) const = default;
};

/// Address bits, low to high: [interleave offset][bank][rank][column high][row].
/// Consecutive interleave granules land in consecutive banks, so sequential
/// streams spread across every bank of every rank.
struct AddressMap {
  std::uint32_t interleave_bytes = 64;
};

struct DramConfig {
  std::uint32_t ranks = 4;
  std::uint32_t banks_per_rank = 8;
  std::uint32_t row_bytes = 8192;
  /// Bytes moved by one tBURST (BL8 on a 64-bit channel). Shorter requests
  /// still occupy a whole burst slot; longer ones take several.
  std::uint32_t burst_bytes = 64;
  DramTimings timings{};
  /// Target cycles per memory-controller cycle (3.2 GHz core over an 800 MHz
  /// DDR3-1600 controller).
  std::uint32_t clock_ratio = 4;
  std::uint32_t queue_depth = 32;
  AddressMap map{};
  /// After this many times an older ready request has been passed over, it is
  /// served next regardless of row state. 0 disables the cap (pure FR-FCFS).
  std::uint32_t max_bypass = 16;

  std::uint32_t total_banks() const noexcept { return ranks * banks_per_rank; }
  /// Timings scaled to target cycles.
  DramTimings target_timings() const noexcept;
  /// Target cycles the data bus is busy for a request of `bytes`.
  std::uint32_t data_cycles(std::uint32_t bytes) const noexcept;
};

void validate(const DramConfig& cfg);

struct DramLocation {
  std::uint32_t rank = 0;
  std::uint32_t bank = 0;  ///< flat index over ranks x banks
  std::uint64_t row = 0;
};

DramLocation decode(const DramConfig& cfg, std::uint64_t addr) noexcept;

struct BankState {
  std::optional<std::uint64_t> open_row;
  std::uint64_t busy_until = 0;
  std::uint64_t row_hits = 0;
  std::uint64_t row_misses = 0;
};

struct QueuedRequest {
  MemTransaction txn;
  std::uint32_t bank = 0;
  std::uint64_t row = 0;
  std::uint64_t arrival_cycle = 0;
  std::uint32_t bypassed = 0;
};

/// Extra context FR-FCFS needs beyond bank state: the data-bus reservation and
/// the target-cycle timings used to decide whether a command can issue now.
struct IssueContext {
  DramTimings timings{};
  std::uint64_t data_bus_free = 0;
  std::uint32_t max_bypass = 0;
};

/// Cycles from column-command issue to first data for a request, given the
/// bank's open row (0 for a hit, tRCD for a closed bank, tRP+tRCD otherwise).
std::uint32_t activation_delay(const BankState& bank, std::uint64_t row,
                               const DramTimings& t) noexcept;

/// First-ready, first-come-first-served selection over an arrival-ordered
/// queue. A request is ready when its bank is idle, its data burst would find
/// the data bus free, and no older request overlaps its address range. Among
/// ready requests the oldest row hit wins, else the oldest ready request.
std::optional<std::size_t> frfcfs_pick(std::span<const QueuedRequest> queue,
                                       std::span<const BankState> banks, std::uint64_t cycle,
                                       const IssueContext& ctx);

struct DramCounters {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t row_hits = 0;
  std::uint64_t row_misses = 0;
  std::uint64_t rejected = 0;
  std::uint64_t bytes = 0;
};

/// One channel of ranked, banked DRAM with an FR-FCFS request queue.
class DramController {
 public:
  explicit DramController(const DramConfig& cfg);

  const DramConfig& config() const noexcept { return cfg_; }

  /// Accepts the request iff the queue has room; otherwise the caller must hold
  /// it and retry (backpressure).
  bool enqueue(const MemTransaction& txn, std::uint64_t cycle);

  /// Issues at most one command, then appends every transaction whose data
  /// completes at `cycle` to `done` (complete_cycle set).
  void tick(std::uint64_t cycle, std::vector<MemTransaction>& done);
  std::vector<MemTransaction> tick(std::uint64_t cycle);

  std::size_t occupancy() const noexcept { return queue_.size(); }
  std::size_t free_slots() const noexcept { return cfg_.queue_depth - queue_.size(); }
  std::size_t in_flight() const noexcept { return in_flight_.size(); }
  bool idle() const noexcept { return queue_.empty() && in_flight_.empty(); }

  std::span<const QueuedRequest> queue() const noexcept { return queue_; }
  std::span<const BankState> banks() const noexcept { return banks_; }
  const DramCounters& counters() const noexcept { return counters_; }
  /// Issue order of every request so far (transaction ids).
  const std::vector<std::uint64_t>& issue_log() const noexcept { return issue_log_; }
  void keep_issue_log(bool on) noexcept { log_issues_ = on; }

  /// Cycles from issue to completion for an isolated request of at most
  /// burst_bytes.
  std::uint32_t row_hit_latency() const noexcept;
  std::uint32_t row_miss_latency() const noexcept;

 private:
  DramConfig cfg_;
  DramTimings t_;
  std::vector<QueuedRequest> queue_;
  std::vector<BankState> banks_;
  std::deque<MemTransaction> in_flight_;  // completion order == issue order
  std::uint64_t data_bus_free_ = 0;
  DramCounters counters_;
  std::vector<std::uint64_t> issue_log_;
  bool log_issues_ = false;
};

bool dram_enqueue(DramController& dram, const MemTransaction& txn, std::uint64_t cycle);
std::vector<MemTransaction> dram_tick(DramController& dram, std::uint64_t cycle);

}  // namespace nvsim::memsys
