#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nvsim/memsys/transaction.hpp"

namespace nvsim::memsys {

class InvalidGeometry final : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Set-associative geometry. The same record describes the shared LLC and the
/// private L1s; it can be swapped at run time without rebuilding anything.
struct CacheConfig {
  std::uint32_t num_sets = 4096;
  std::uint32_t ways = 8;
  std::uint32_t block_bytes = 64;
  std::uint32_t hit_latency = 20;
  bool enabled = true;

  std::uint64_t capacity() const noexcept {
    return std::uint64_t{num_sets} * ways * block_bytes;
  }
  bool operator==(const CacheConfig&) const = default;
};

/// Throws InvalidGeometry unless num_sets is a power of two, ways > 0 and
/// block_bytes is 32, 64 or 128.
void validate(const CacheConfig& cfg);

/// Geometry for a target capacity obtained by varying the set count. When the
/// capacity holds fewer lines than `ways`, associativity shrinks to the line
/// count (a single fully-associative set).
CacheConfig geometry_for_capacity(std::uint64_t capacity_bytes, std::uint32_t ways,
                                  std::uint32_t block_bytes, std::uint32_t hit_latency = 20);

struct CacheCounters {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t writebacks = 0;

  std::uint64_t accesses() const noexcept { return hits + misses; }
  bool operator==(const CacheCounters&) const = default;
};

struct BlockRequest {
  std::uint64_t addr = 0;
  std::uint32_t bytes = 0;
  bool operator==(const BlockRequest&) const = default;
};

struct AccessOutcome {
  bool hit = false;
  std::uint32_t latency = 0;
  std::optional<BlockRequest> fill;
  std::optional<BlockRequest> writeback;
};

/// Result of a lookup that does not touch replacement state.
struct Probe {
  bool hit = false;
  bool victim_dirty = false;
};

/// Tag, LRU and dirty state of one cache. Write-back, write-allocate.
class CacheState {
 public:
  explicit CacheState(const CacheConfig& cfg);

  const CacheConfig& config() const noexcept { return cfg_; }
  const CacheCounters& counters() const noexcept { return counters_; }

  std::uint64_t block_of(std::uint64_t addr) const noexcept { return addr >> block_shift_; }
  std::uint32_t set_of(std::uint64_t addr) const noexcept {
    return static_cast<std::uint32_t>(block_of(addr) & set_mask_);
  }

  Probe probe(std::uint64_t addr) const noexcept;
  bool contains(std::uint64_t addr) const noexcept { return probe(addr).hit; }

  /// Looks up the block holding `addr` and updates LRU, dirtiness and counters.
  AccessOutcome access(std::uint64_t addr, Access kind);

  std::uint32_t valid_lines(std::uint32_t set) const noexcept;

 private:
  struct Line {
    std::uint64_t block = 0;
    std::uint64_t last_use = 0;
    bool valid = false;
    bool dirty = false;
  };

  Line* set_begin(std::uint32_t set) noexcept { return lines_.data() + std::size_t{set} * cfg_.ways; }
  const Line* set_begin(std::uint32_t set) const noexcept {
    return lines_.data() + std::size_t{set} * cfg_.ways;
  }
  std::uint32_t victim_way(std::uint32_t set) const noexcept;

  CacheConfig cfg_;
  std::uint32_t block_shift_ = 0;
  std::uint64_t set_mask_ = 0;
  std::vector<Line> lines_;
  std::uint64_t use_clock_ = 0;
  CacheCounters counters_;
};

/// Fresh, all-invalid state for a new geometry.
CacheState llc_reconfigure(const CacheConfig& cfg);

/// One block-sized (or smaller, block-contained) sub-access of a transaction.
/// Requires cfg.enabled and an access that does not straddle a block.
AccessOutcome llc_access(CacheState& state, const MemTransaction& txn);

}  // namespace nvsim::memsys
