#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nvsim/accel/accelerator.hpp"
#include "nvsim/cpu/core.hpp"
#include "nvsim/harness/config.hpp"
#include "nvsim/memsys/memory_system.hpp"
#include "nvsim/workload/network.hpp"

namespace nvsim::harness {

struct CoRunners {
  std::uint32_t count = 0;
  std::uint64_t wss = cpu::wss_bytes(cpu::WssClass::L1);
};

/// Raw counters of one simulated accelerator run.
struct SimStats {
  /// Target cycle at which the last accelerator layer completed.
  std::uint64_t total_cycles = 0;
  std::uint64_t accel_cycles = 0;
  std::vector<accel::LayerResult> layers;
  memsys::MemSystemStats memory{};
  std::vector<cpu::CoreCounters> cores;
  std::uint64_t host_sweeps = 0;
  std::vector<accel::TraceRecord> trace;

  /// Sum of layer totals, skipping the first `warmup` layers.
  std::uint64_t timed_cycles(std::size_t warmup) const noexcept;
};

struct RunRequest {
  CoRunners co_runners{};
  std::uint64_t seed = 1;
  bool trace = false;
  /// Cycles the co-runners run before the accelerator starts its first layer.
  std::uint64_t lead_cycles = 0;
};

/// Assembles accelerator, memory system and co-runner cores as kernel models
/// and runs them until every accelerator layer has completed.
SimStats simulate(const PlatformConfig& platform, const std::vector<accel::LayerJob>& jobs,
                  const RunRequest& req = {});

/// Accelerator-placed layers of `net` as jobs for `platform`.
std::vector<accel::LayerJob> accelerator_jobs(const PlatformConfig& platform, const workload::Network& net);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Four decimal places, fixed notation.
std::string format_ratio(double v);
std::string format_ratio(std::uint64_t num, std::uint64_t den);

void write_csv(const CsvTable& table, std::ostream& out);
/// Writes `table` to `path`; IO failures are reported with the path.
void emit_stats(const CsvTable& table, const std::filesystem::path& path);
/// Writes `<path>.meta` describing how the numbers were measured.
void emit_meta(const ExperimentConfig& cfg, const std::string& experiment, const std::filesystem::path& path);

struct FpsReport {
  std::uint64_t accel_cycles = 0;
  std::uint64_t cpu_cycles = 0;
  std::uint64_t total_cycles = 0;
  double freq_ghz = 0;
  std::size_t accel_layers = 0;
  std::size_t cpu_layers = 0;
  std::size_t inserted_converts = 0;
  std::uint64_t total_ops = 0;
  std::vector<accel::LayerResult> layers;

  double accel_ms() const noexcept { return accel_cycles / (freq_ghz * 1e6); }
  double cpu_ms() const noexcept { return cpu_cycles / (freq_ghz * 1e6); }
  double frame_ms() const noexcept { return total_cycles / (freq_ghz * 1e6); }
  double fps() const noexcept { return freq_ghz * 1e9 / static_cast<double>(total_cycles); }
};

/// Reference figures reported for the original hardware study, printed for
/// side-by-side context only.
struct PublishedFigures {
  static constexpr double accel_fps = 7.5;
  static constexpr double gpu_fps = 41.0;
  static constexpr double speedup_over_scalar = 407.0;
  static constexpr double frame_ms = 133.0;
  static constexpr double accel_ms = 67.0;
};

FpsReport run_fps(const ExperimentConfig& cfg, const workload::Network& net);
/// Human-readable summary including the published reference figures.
void print_fps(const FpsReport& r, std::ostream& out);
/// layer, kind, tiles, compute_cycles, memory_cycles, total_cycles
CsvTable fps_layers_csv(const FpsReport& r, const workload::Network& net);

/// capacity, block_bytes, accel_cycles, speedup_vs_no_llc; the first row is
/// the no-LLC baseline (capacity 0, block 0).
CsvTable run_llc_sweep(const ExperimentConfig& cfg, const workload::Network& net);

/// co_runners, wss_class, accel_cycles, normalized_time; the first row is the
/// solo run (0 co-runners, class "none").
CsvTable run_interference(const ExperimentConfig& cfg, const workload::Network& net);

/// layer, tile, kind, addr, size, issue, complete for every accelerator burst.
CsvTable dump_trace(const ExperimentConfig& cfg, const workload::Network& net);

}  // namespace nvsim::harness
