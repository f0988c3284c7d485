#include "nvsim/memsys/cache.hpp"

#include <bit>
#include <string>

namespace nvsim::memsys {

void validate(const CacheConfig& cfg) {
  if (cfg.num_sets == 0 || !std::has_single_bit(cfg.num_sets))
    throw InvalidGeometry("num_sets must be a power of two, got " + std::to_string(cfg.num_sets));
  if (cfg.ways == 0) throw InvalidGeometry("ways must be positive");
  if (cfg.block_bytes != 32 && cfg.block_bytes != 64 && cfg.block_bytes != 128)
    throw InvalidGeometry("block_bytes must be 32, 64 or 128, got " +
                          std::to_string(cfg.block_bytes));
}

CacheConfig geometry_for_capacity(std::uint64_t capacity_bytes, std::uint32_t ways,
                                  std::uint32_t block_bytes, std::uint32_t hit_latency) {
  if (block_bytes == 0 || capacity_bytes % block_bytes != 0)
    throw InvalidGeometry("capacity must be a multiple of the block size");
  const std::uint64_t lines = capacity_bytes / block_bytes;
  if (lines == 0 || ways == 0) throw InvalidGeometry("capacity holds no lines");
  CacheConfig cfg;
  cfg.block_bytes = block_bytes;
  cfg.hit_latency = hit_latency;
  if (lines < ways) {
    cfg.ways = static_cast<std::uint32_t>(lines);
    cfg.num_sets = 1;
  } else {
    if (lines % ways != 0) throw InvalidGeometry("capacity is not a whole number of sets");
    cfg.ways = ways;
    cfg.num_sets = static_cast<std::uint32_t>(lines / ways);
  }
  validate(cfg);
  return cfg;
}

CacheState::CacheState(const CacheConfig& cfg) : cfg_(cfg) {
  validate(cfg_);
  block_shift_ = static_cast<std::uint32_t>(std::countr_zero(cfg_.block_bytes));
  set_mask_ = cfg_.num_sets - 1;
  lines_.resize(std::size_t{cfg_.num_sets} * cfg_.ways);
}

std::uint32_t CacheState::victim_way(std::uint32_t set) const noexcept {
  const Line* first = set_begin(set);
  std::uint32_t best = 0;
  for (std::uint32_t w = 0; w < cfg_.ways; ++w) {
    if (!first[w].valid) return w;
    if (first[w].last_use < first[best].last_use) best = w;
  }
  return best;
}

Probe CacheState::probe(std::uint64_t addr) const noexcept {
  const std::uint64_t blk = block_of(addr);
  const std::uint32_t set = set_of(addr);
  const Line* first = set_begin(set);
  for (std::uint32_t w = 0; w < cfg_.ways; ++w)
    if (first[w].valid && first[w].block == blk) return {true, false};
  const Line& v = first[victim_way(set)];
  return {false, v.valid && v.dirty};
}

AccessOutcome CacheState::access(std::uint64_t addr, Access kind) {
  const std::uint64_t blk = block_of(addr);
  const std::uint32_t set = set_of(addr);
  Line* first = set_begin(set);
  ++use_clock_;

  for (std::uint32_t w = 0; w < cfg_.ways; ++w) {
    Line& l = first[w];
    if (l.valid && l.block == blk) {
      l.last_use = use_clock_;
      if (kind == Access::Write) l.dirty = true;
      ++counters_.hits;
      return {true, cfg_.hit_latency, std::nullopt, std::nullopt};
    }
  }

  Line& v = first[victim_way(set)];
  AccessOutcome out;
  out.hit = false;
  out.latency = cfg_.hit_latency;
  out.fill = BlockRequest{blk << block_shift_, cfg_.block_bytes};
  if (v.valid && v.dirty) {
    out.writeback = BlockRequest{v.block << block_shift_, cfg_.block_bytes};
    ++counters_.writebacks;
  }
  v.block = blk;
  v.valid = true;
  v.dirty = kind == Access::Write;
  v.last_use = use_clock_;
  ++counters_.misses;
  return out;
}

std::uint32_t CacheState::valid_lines(std::uint32_t set) const noexcept {
  std::uint32_t n = 0;
  const Line* first = set_begin(set);
  for (std::uint32_t w = 0; w < cfg_.ways; ++w) n += first[w].valid ? 1 : 0;
  return n;
}

CacheState llc_reconfigure(const CacheConfig& cfg) { return CacheState(cfg); }

AccessOutcome llc_access(CacheState& state, const MemTransaction& txn) {
  const CacheConfig& cfg = state.config();
  if (!cfg.enabled) throw std::logic_error("llc_access on a disabled cache");
  if (txn.size == 0 || state.block_of(txn.addr) != state.block_of(txn.addr + txn.size - 1))
    throw std::invalid_argument("llc_access expects a sub-access contained in one block");
  return state.access(txn.addr, txn.kind);
}

}  // namespace nvsim::memsys
