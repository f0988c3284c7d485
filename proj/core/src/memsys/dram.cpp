#include "nvsim/memsys/dram.hpp"

#include <stdexcept>
#include <string>

namespace nvsim::memsys {

DramTimings DramConfig::target_timings() const noexcept {
  return {timings.tRCD * clock_ratio, timings.tRP * clock_ratio, timings.tCL * clock_ratio,
          timings.tBURST * clock_ratio};
}

std::uint32_t DramConfig::data_cycles(std::uint32_t bytes) const noexcept {
  const std::uint32_t bursts = bytes == 0 ? 1 : (bytes + burst_bytes - 1) / burst_bytes;
  return bursts * timings.tBURST * clock_ratio;
}

void validate(const DramConfig& cfg) {
  if (cfg.ranks == 0 || cfg.banks_per_rank == 0) throw std::invalid_argument("dram needs ranks and banks");
  if (cfg.timings.tRCD == 0 || cfg.timings.tRP == 0 || cfg.timings.tCL == 0 ||
      cfg.timings.tBURST == 0 || cfg.clock_ratio == 0)
    throw std::invalid_argument("dram timings must be positive");
  if (cfg.burst_bytes == 0) throw std::invalid_argument("dram burst_bytes must be positive");
  if (cfg.queue_depth == 0) throw std::invalid_argument("dram queue_depth must be >= 1");
  if (cfg.map.interleave_bytes == 0 || cfg.row_bytes == 0 ||
      cfg.row_bytes % cfg.map.interleave_bytes != 0)
    throw std::invalid_argument("dram row_bytes must be a positive multiple of interleave_bytes");
}

DramLocation decode(const DramConfig& cfg, std::uint64_t addr) noexcept {
  const std::uint64_t granule = addr / cfg.map.interleave_bytes;
  const std::uint32_t banks = cfg.total_banks();
  const std::uint32_t flat = static_cast<std::uint32_t>(granule % banks);
  const std::uint64_t per_bank = granule / banks;
  const std::uint64_t granules_per_row = cfg.row_bytes / cfg.map.interleave_bytes;
  return {flat / cfg.banks_per_rank, flat, per_bank / granules_per_row};
}

std::uint32_t activation_delay(const BankState& bank, std::uint64_t row,
                               const DramTimings& t) noexcept {
  if (bank.open_row && *bank.open_row == row) return 0;
  return (bank.open_row ? t.tRP : 0) + t.tRCD;
}

namespace {

bool overlaps(const MemTransaction& a, const MemTransaction& b) noexcept {
  return a.addr < b.addr + b.size && b.addr < a.addr + a.size;
}

}  // namespace

std::optional<std::size_t> frfcfs_pick(std::span<const QueuedRequest> queue,
                                       std::span<const BankState> banks, std::uint64_t cycle,
                                       const IssueContext& ctx) {
  std::optional<std::size_t> oldest_ready;
  std::optional<std::size_t> oldest_hit;
  std::optional<std::size_t> starving;

  for (std::size_t i = 0; i < queue.size(); ++i) {
    const QueuedRequest& r = queue[i];
    const BankState& b = banks[r.bank];
    if (b.busy_until > cycle) continue;
    const std::uint32_t delay = activation_delay(b, r.row, ctx.timings);
    if (cycle + delay + ctx.timings.tCL < ctx.data_bus_free) continue;

    bool blocked = false;
    for (std::size_t j = 0; j < i && !blocked; ++j) blocked = overlaps(queue[j].txn, r.txn);
    if (blocked) continue;

    if (ctx.max_bypass > 0 && r.bypassed >= ctx.max_bypass) {
      starving = i;
      break;
    }
    if (!oldest_ready) oldest_ready = i;
    if (delay == 0) {
      oldest_hit = i;
      break;
    }
  }
  if (starving) return starving;
  if (oldest_hit) return oldest_hit;
  return oldest_ready;
}

DramController::DramController(const DramConfig& cfg) : cfg_(cfg), t_(cfg.target_timings()) {
  validate(cfg_);
  queue_.reserve(cfg_.queue_depth);
  banks_.resize(cfg_.total_banks());
}

std::uint32_t DramController::row_hit_latency() const noexcept { return t_.tCL + t_.tBURST; }
std::uint32_t DramController::row_miss_latency() const noexcept {
  return t_.tRP + t_.tRCD + t_.tCL + t_.tBURST;
}

bool DramController::enqueue(const MemTransaction& txn, std::uint64_t cycle) {
  if (queue_.size() >= cfg_.queue_depth) {
    ++counters_.rejected;
    return false;
  }
  const DramLocation loc = decode(cfg_, txn.addr);
  queue_.push_back({txn, loc.bank, loc.row, cycle, 0});
  return true;
}

void DramController::tick(std::uint64_t cycle, std::vector<MemTransaction>& done) {
  if (!queue_.empty()) {
    const IssueContext ctx{t_, data_bus_free_, cfg_.max_bypass};
    if (auto pick = frfcfs_pick(queue_, banks_, cycle, ctx)) {
      const std::size_t i = *pick;
      QueuedRequest r = std::move(queue_[i]);
      for (std::size_t j = 0; j < i; ++j) ++queue_[j].bypassed;
      queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(i));

      BankState& bank = banks_[r.bank];
      const std::uint32_t delay = activation_delay(bank, r.row, t_);
      if (delay == 0) {
        ++bank.row_hits;
        ++counters_.row_hits;
      } else {
        ++bank.row_misses;
        ++counters_.row_misses;
      }
      const std::uint32_t data = cfg_.data_cycles(r.txn.size);
      bank.open_row = r.row;
      bank.busy_until = cycle + delay + data;

      const std::uint64_t complete = cycle + delay + t_.tCL + data;
      data_bus_free_ = complete;
      r.txn.complete_cycle = complete;
      if (r.txn.kind == Access::Read)
        ++counters_.reads;
      else
        ++counters_.writes;
      counters_.bytes += r.txn.size;
      if (log_issues_) issue_log_.push_back(r.txn.id);
      in_flight_.push_back(std::move(r.txn));
    }
  }
  while (!in_flight_.empty() && *in_flight_.front().complete_cycle <= cycle) {
    done.push_back(std::move(in_flight_.front()));
    in_flight_.pop_front();
  }
}

std::vector<MemTransaction> DramController::tick(std::uint64_t cycle) {
  std::vector<MemTransaction> done;
  tick(cycle, done);
  return done;
}

bool dram_enqueue(DramController& dram, const MemTransaction& txn, std::uint64_t cycle) {
  return dram.enqueue(txn, cycle);
}

std::vector<MemTransaction> dram_tick(DramController& dram, std::uint64_t cycle) {
  return dram.tick(cycle);
}

}  // namespace nvsim::memsys
