#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "nvsim/kernel/channel.hpp"
#include "nvsim/kernel/model.hpp"
#include "nvsim/memsys/bus.hpp"
#include "nvsim/memsys/cache.hpp"
#include "nvsim/memsys/dram.hpp"
#include "nvsim/memsys/transaction.hpp"

namespace nvsim::memsys {

struct MemSystemConfig {
  BusConfig bus{};
  CacheConfig llc{};
  DramConfig dram{};
  /// Transfer unit between the bus and DRAM when the LLC is disabled.
  std::uint32_t direct_access_bytes = kMinBurstBytes;
  /// LLC lookups stall while this many misses/writebacks wait for DRAM queue
  /// slots.
  std::uint32_t llc_outbound_limit = 16;
};

void validate(const MemSystemConfig& cfg);

struct PortStats {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t bytes = 0;
  std::uint64_t completed = 0;
  std::uint64_t latency_sum = 0;
  std::uint64_t latency_max = 0;
};

struct MemSystemStats {
  std::vector<PortStats> ports;
  CacheCounters llc{};
  std::uint64_t llc_fills = 0;
  /// Write misses covering a whole block, installed without a DRAM read.
  std::uint64_t llc_skipped_fills = 0;
  std::uint64_t llc_writebacks = 0;
  DramCounters dram{};
  std::uint64_t dram_transactions = 0;
  std::uint64_t bus_busy_cycles = 0;
};

/// Cycle-driven shared memory path: front bus, LLC (or a direct path when the
/// LLC is disabled) and DRAM. Independent of the token kernel so that its
/// timing can be tested directly; MemorySystemModel wraps it.
class MemoryPipeline {
 public:
  explicit MemoryPipeline(const MemSystemConfig& cfg);

  const MemSystemConfig& config() const noexcept { return cfg_; }

  /// Queues a transaction at port `port` for bus arbitration.
  void submit(std::size_t port, MemTransaction txn, std::uint64_t cycle);

  /// Runs one target cycle.
  void advance(std::uint64_t cycle);

  /// Oldest finished transaction of a port, if any (complete_cycle set).
  std::optional<MemTransaction> pop_response(std::size_t port);

  bool idle() const noexcept;
  MemSystemStats stats() const;
  const CacheState& llc() const noexcept { return llc_; }
  const DramController& dram() const noexcept { return dram_; }
  const FrontBus& bus() const noexcept { return bus_; }

 private:
  enum class EventKind : std::uint8_t { Arrive, SubDone, Respond };
  struct Event {
    std::uint64_t cycle;
    std::uint64_t seq;
    EventKind kind;
    std::uint32_t slot;
    bool operator>(const Event& o) const noexcept {
      return cycle != o.cycle ? cycle > o.cycle : seq > o.seq;
    }
  };
  struct Pending {
    MemTransaction txn;
    std::uint32_t port = 0;
    std::uint32_t remaining = 0;
  };
  struct SubAccess {
    std::uint32_t slot;
    std::uint64_t addr;
    std::uint32_t bytes;
    Access kind;
  };
  enum class Purpose : std::uint8_t { Fill, Writeback, Direct };
  struct Outbound {
    std::uint64_t ready;
    MemTransaction txn;
    Purpose purpose;
    std::uint32_t slot;
  };
  struct Tag {
    Purpose purpose;
    std::uint32_t slot;
    std::uint64_t block;
  };

  void schedule(std::uint64_t cycle, EventKind kind, std::uint32_t slot);
  void on_arrive(std::uint32_t slot, std::uint64_t cycle);
  void sub_done(std::uint32_t slot, std::uint64_t cycle);
  void run_llc(std::uint64_t cycle);
  void drain_outbound(std::uint64_t cycle);
  void push_outbound(std::uint64_t ready, Access kind, std::uint64_t addr, std::uint32_t bytes,
                     Purpose purpose, std::uint32_t slot);

  MemSystemConfig cfg_;
  FrontBus bus_;
  CacheState llc_;
  DramController dram_;

  std::vector<Pending> slots_;
  std::vector<std::uint32_t> free_slots_;
  std::vector<std::deque<std::uint32_t>> port_queues_;
  std::size_t queued_requests_ = 0;
  std::vector<std::optional<MemTransaction>> heads_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t event_seq_ = 0;
  std::deque<SubAccess> llc_fifo_;
  std::deque<Outbound> outbound_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> fill_waiters_;
  std::unordered_map<std::uint64_t, Tag> dram_tags_;
  std::uint64_t next_dram_id_ = 1;
  std::vector<MemTransaction> dram_done_;
  std::vector<std::deque<MemTransaction>> responses_;
  std::size_t in_flight_ = 0;

  std::vector<PortStats> port_stats_;
  std::uint64_t llc_fills_ = 0;
  std::uint64_t llc_skipped_fills_ = 0;
  std::uint64_t llc_writebacks_ = 0;
};

/// Request/response channel pair of one bus master. Requests flow master to
/// memory (one optional transaction per cycle); responses flow back.
struct MemPort {
  kernel::Channel<MemTransaction>* requests = nullptr;
  kernel::Channel<MemTransaction>* responses = nullptr;
};

/// The shared memory system as one decoupled target model with one
/// request/response channel pair per master.
class MemorySystemModel final : public kernel::Model {
 public:
  MemorySystemModel(std::string name, const MemSystemConfig& cfg, std::vector<MemPort> ports);

  const MemoryPipeline& pipeline() const noexcept { return pipe_; }

 protected:
  void tick() override;

 private:
  MemoryPipeline pipe_;
  std::vector<MemPort> ports_;
};

}  // namespace nvsim::memsys
