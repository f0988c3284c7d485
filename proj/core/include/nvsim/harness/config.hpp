#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nvsim/accel/tiling.hpp"
#include "nvsim/cpu/core.hpp"
#include "nvsim/kernel/simulator.hpp"
#include "nvsim/memsys/memory_system.hpp"

namespace nvsim::harness {

struct PlatformConfig {
  double freq_ghz = 3.2;
  /// Cores sharing the CPU-placed DNN layers.
  std::uint32_t cpu_cores = 4;
  /// Sustained single-precision ops per cycle per core on CPU layers.
  double cpu_ops_per_cycle = 0.25;

  /// Bus, LLC and DRAM. The LLC set count is derived from llc_capacity.
  memsys::MemSystemConfig mem{};
  std::uint64_t llc_capacity = 2 * 1024 * 1024;

  accel::AccelConfig accel{};
  cpu::L1Config l1{};
  std::uint32_t core_mshrs = 2;
  std::uint64_t bwwrite_stride = 64;

  /// Skip memory simulation: accelerator layers take their compute time.
  bool ideal_memory = false;
  kernel::HostOrder host_order = kernel::HostOrder::RoundRobin;

  /// Memory system with LLC geometry resolved for `ports` bus masters.
  memsys::MemSystemConfig memory(std::uint32_t ports) const;
};

void validate(const PlatformConfig& cfg);

struct SweepSpec {
  static std::vector<std::uint64_t> default_capacities() {
    std::vector<std::uint64_t> v;
    for (std::uint64_t c = 512; c <= 4 * 1024 * 1024; c *= 2) v.push_back(c);
    return v;
  }

  /// LLC capacities in bytes; 0 is not allowed (the no-LLC row is implicit).
  /// 0.5 KiB doubling up to 4 MiB.
  std::vector<std::uint64_t> capacities = default_capacities();
  std::vector<std::uint32_t> block_sizes{32, 64, 128};
  std::vector<std::uint32_t> co_runners{1, 2, 3, 4};
  std::vector<cpu::WssClass> wss_classes{cpu::WssClass::L1, cpu::WssClass::Llc, cpu::WssClass::Dram};
  /// Leading accelerator layers run but excluded from sweep timings.
  std::uint32_t warmup_layers = 1;
  /// Co-runners start this many cycles ahead of the accelerator.
  std::uint64_t corunner_lead_cycles = 1'000'000;
};

struct ExperimentConfig {
  PlatformConfig platform{};
  std::filesystem::path network;
  SweepSpec sweep{};
  std::uint64_t seed = 1;
  std::filesystem::path output;
};

/// Sections [platform] [llc] [dram] [accel] [cpu] [sweep]. Relative paths are
/// resolved against `base_dir`. Unknown sections or keys are errors.
ExperimentConfig parse_config(std::istream& in, const std::string& source,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies one `section.key=value` override.
void apply_override(ExperimentConfig& cfg, std::string_view assignment);

/// Checks every parameter and every sweep value against its module's rules.
void validate(const ExperimentConfig& cfg);

/// Every recognised `section.key`, in documentation order.
std::vector<std::string> config_keys();

/// "512", "4KiB", "2MiB", "1GiB" (also K/M/G and KB/MB/GB as binary units).
std::uint64_t parse_bytes(std::string_view s);

}  // namespace nvsim::harness
