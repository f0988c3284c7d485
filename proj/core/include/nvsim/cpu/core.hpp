#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nvsim/kernel/channel.hpp"
#include "nvsim/kernel/model.hpp"
#include "nvsim/memsys/cache.hpp"
#include "nvsim/memsys/transaction.hpp"
#include "nvsim/workload/network.hpp"

namespace nvsim::cpu {

using memsys::Access;
using memsys::MemTransaction;

struct L1Config {
  std::uint64_t capacity = 16 * 1024;
  std::uint32_t ways = 4;
  std::uint32_t block_bytes = 64;
  std::uint32_t hit_latency = 1;

  memsys::CacheConfig cache_config() const;
};

/// Throws memsys::InvalidGeometry unless capacity == sets * ways * block with
/// a power-of-two set count.
void validate(const L1Config& cfg);

struct BwWriteConfig {
  std::uint64_t wss = 32 * 1024;
  std::uint64_t stride = 64;
  std::uint8_t core = 0;
  std::uint64_t start_addr = 0;
};

void validate(const BwWriteConfig& cfg);

struct L1Request {
  std::uint64_t addr = 0;
  Access kind = Access::Write;
};

/// Sequential writer over [start_addr, start_addr + wss).
class BwWriteGen {
 public:
  explicit BwWriteGen(const BwWriteConfig& cfg);

  const BwWriteConfig& config() const noexcept { return cfg_; }
  std::uint64_t issued() const noexcept { return i_; }
  /// Index of the sweep the next access belongs to.
  std::uint64_t sweep() const noexcept { return i_ * cfg_.stride / cfg_.wss; }
  /// Address of the next access without consuming it.
  std::uint64_t peek() const noexcept { return cfg_.start_addr + (i_ * cfg_.stride) % cfg_.wss; }
  std::uint64_t next() noexcept { const std::uint64_t a = peek(); ++i_; return a; }

 private:
  BwWriteConfig cfg_;
  std::uint64_t i_ = 0;
};

/// One write per cycle: start_addr + (i * stride) mod wss. The cycle argument
/// is accepted for symmetry with other per-cycle generators and unused.
std::optional<L1Request> bwwrite_step(BwWriteGen& gen, std::uint64_t cycle);

struct L1Outcome {
  bool hit = false;
  std::optional<MemTransaction> fill;
  std::optional<MemTransaction> writeback;
};

/// Private-cache lookup. Misses yield a block fill and, for a dirty victim, a
/// block writeback, both as front-bus transactions of core `core`.
L1Outcome l1_access(memsys::CacheState& state, const L1Config& cfg, std::uint8_t core,
                    const L1Request& req, std::uint64_t cycle);

enum class WssClass { L1, Llc, Dram };
std::string_view to_string(WssClass c) noexcept;
WssClass parse_wss_class(std::string_view s);

/// Working set used for each class: 8 KiB fits the L1, 256 KiB per core fits
/// the LLC alongside the accelerator, 16 MiB spills to DRAM.
std::uint64_t wss_bytes(WssClass c) noexcept;

/// Disjoint base address of core i's working set.
constexpr std::uint64_t core_region(std::uint8_t core) noexcept {
  return 0x1'0000'0000ull + std::uint64_t{core} * 0x1000'0000ull;
}

struct CoreCounters {
  std::uint64_t writes = 0;
  std::uint64_t stall_cycles = 0;
  std::uint64_t fills = 0;
  std::uint64_t writebacks = 0;
  memsys::CacheCounters l1{};
};

/// BwWrite behind a private L1 as one kernel model. Up to `mshrs` fills may
/// be outstanding; when the limit is reached the core stalls until a fill
/// returns. Writebacks do not occupy an MSHR.
class CoreModel final : public kernel::Model {
 public:
  CoreModel(std::string name, const L1Config& l1, const BwWriteConfig& gen, std::uint32_t mshrs,
            kernel::Channel<MemTransaction>& responses, kernel::Channel<MemTransaction>& requests);

  const CoreCounters& counters() const noexcept { return counters_; }
  const memsys::CacheState& l1() const noexcept { return l1_; }
  /// Fills (shared-bus transactions caused by misses) per completed or
  /// current sweep of the working set.
  const std::vector<std::uint64_t>& fills_per_sweep() const noexcept { return per_sweep_; }

 protected:
  void tick() override;

 private:
  L1Config cfg_;
  BwWriteGen gen_;
  memsys::CacheState l1_;
  std::uint32_t mshrs_;
  kernel::Channel<MemTransaction>& responses_;
  kernel::Channel<MemTransaction>& requests_;
  std::deque<MemTransaction> outbound_;
  std::uint32_t outstanding_ = 0;
  std::uint64_t next_id_ = 1;
  CoreCounters counters_;
  std::vector<std::uint64_t> per_sweep_;
};

/// ceil(layer_ops / (cores * ops_per_cycle)). Throws UnsupportedLayer for
/// accelerator-placed layers.
std::uint64_t cpu_layer_cycles(const workload::LayerDescriptor& layer, std::uint32_t cores,
                               double ops_per_cycle);

}  // namespace nvsim::cpu
