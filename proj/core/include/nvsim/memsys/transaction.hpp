#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace nvsim::memsys {

enum class Access : std::uint8_t { Read, Write };

/// Bus master that issued a transaction.
struct Source {
  enum class Kind : std::uint8_t { Core, Accelerator, Llc };

  Kind kind = Kind::Core;
  std::uint8_t index = 0;

  static constexpr Source core(std::uint8_t i) noexcept { return {Kind::Core, i}; }
  static constexpr Source accelerator() noexcept { return {Kind::Accelerator, 0}; }
  static constexpr Source llc() noexcept { return {Kind::Llc, 0}; }

  bool operator==(const Source&) const = default;
};

std::string to_string(Source s);

/// Smallest accelerator burst; every accelerator transfer is a multiple of it.
inline constexpr std::uint32_t kMinBurstBytes = 32;

struct MemTransaction {
  std::uint64_t id = 0;
  Access kind = Access::Read;
  std::uint64_t addr = 0;
  std::uint32_t size = 0;
  Source source{};
  std::uint64_t issue_cycle = 0;
  std::optional<std::uint64_t> complete_cycle;

  bool operator==(const MemTransaction&) const = default;
};

/// Throws std::invalid_argument on a zero size, an accelerator transfer that is
/// not a positive multiple of the minimum burst, or complete < issue.
void validate(const MemTransaction& txn);

}  // namespace nvsim::memsys
