#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nvsim/memsys/transaction.hpp"

namespace nvsim::memsys {

/// Round-robin arbiter with a rotating priority pointer. The pointer moves to
/// the port after the last one granted, so every requester is served within
/// one rotation.
class RoundRobinArbiter {
 public:
  explicit RoundRobinArbiter(std::size_t ports);

  std::size_t ports() const noexcept { return ports_; }
  std::size_t pointer() const noexcept { return next_; }

  /// Grants up to `max_grants` requesting ports in priority order.
  std::vector<std::size_t> arbitrate(std::span<const bool> requesting, std::size_t max_grants);

 private:
  std::size_t ports_;
  std::size_t next_ = 0;
};

struct BusConfig {
  std::uint32_t ports = 5;
  std::uint32_t grants_per_cycle = 1;
  std::uint32_t bytes_per_cycle = 32;
  /// One-way traversal latency, paid on the way to memory and on the way back.
  std::uint32_t latency = 4;
};

struct Grant {
  std::size_t port = 0;
  std::uint32_t transfer_cycles = 0;
  /// Cycle at which the transaction reaches the memory side.
  std::uint64_t arrival_cycle = 0;
};

/// Shared bus in front of the LLC. A grant occupies the bus for one cycle per
/// `bytes_per_cycle` of payload; no new grants are issued while it is busy.
class FrontBus {
 public:
  explicit FrontBus(const BusConfig& cfg);

  const BusConfig& config() const noexcept { return cfg_; }
  bool busy(std::uint64_t cycle) const noexcept { return cycle < busy_until_; }
  std::uint32_t transfer_cycles(std::uint32_t bytes) const noexcept;

  /// `heads[i]` is the head request of port i, if any.
  std::vector<Grant> arbitrate(std::span<const std::optional<MemTransaction>> heads,
                               std::uint64_t cycle);

  std::uint64_t grants(std::size_t port) const { return grants_.at(port); }
  std::uint64_t busy_cycles() const noexcept { return busy_cycles_; }

  /// Worst-case cycles a head request waits for its grant when every port
  /// keeps sending transfers of at most `max_bytes`.
  std::uint64_t max_wait(std::uint32_t max_bytes) const noexcept;

 private:
  BusConfig cfg_;
  RoundRobinArbiter arbiter_;
  std::uint64_t busy_until_ = 0;
  std::uint64_t busy_cycles_ = 0;
  std::vector<std::uint64_t> grants_;
  std::unique_ptr<bool[]> requesting_;
};

}  // namespace nvsim::memsys
