#include "nvsim/cpu/core.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace nvsim::cpu {

memsys::CacheConfig L1Config::cache_config() const {
  memsys::CacheConfig c;
  c.ways = ways;
  c.block_bytes = block_bytes;
  c.hit_latency = hit_latency;
  c.num_sets = ways && block_bytes ? static_cast<std::uint32_t>(capacity / (std::uint64_t{ways} * block_bytes)) : 0;
  return c;
}

void validate(const L1Config& cfg) {
  const memsys::CacheConfig c = cfg.cache_config();
  if (c.num_sets == 0 || c.capacity() != cfg.capacity)
    throw memsys::InvalidGeometry("L1 capacity " + std::to_string(cfg.capacity) + " is not sets x " +
                                  std::to_string(cfg.ways) + " ways x " + std::to_string(cfg.block_bytes) + " B");
  memsys::validate(c);
}

void validate(const BwWriteConfig& cfg) {
  if (cfg.wss == 0) throw std::invalid_argument("BwWrite working set must be positive");
  if (cfg.stride == 0) throw std::invalid_argument("BwWrite stride must be positive");
}

BwWriteGen::BwWriteGen(const BwWriteConfig& cfg) : cfg_(cfg) { validate(cfg_); }

std::optional<L1Request> bwwrite_step(BwWriteGen& gen, std::uint64_t /*cycle*/) {
  return L1Request{gen.next(), Access::Write};
}

L1Outcome l1_access(memsys::CacheState& state, const L1Config& cfg, std::uint8_t core,
                    const L1Request& req, std::uint64_t cycle) {
  if (state.config().block_bytes != cfg.block_bytes || state.config().ways != cfg.ways)
    throw std::invalid_argument("L1 state does not match its configuration");
  const memsys::AccessOutcome o = state.access(req.addr, req.kind);
  L1Outcome out;
  out.hit = o.hit;
  auto txn = [&](Access kind, const memsys::BlockRequest& b) {
    MemTransaction t;
    t.kind = kind;
    t.addr = b.addr;
    t.size = b.bytes;
    t.source = memsys::Source::core(core);
    t.issue_cycle = cycle;
    return t;
  };
  if (o.fill) out.fill = txn(Access::Read, *o.fill);
  if (o.writeback) out.writeback = txn(Access::Write, *o.writeback);
  return out;
}

std::string_view to_string(WssClass c) noexcept {
  switch (c) {
    case WssClass::L1: return "L1";
    case WssClass::Llc: return "LLC";
    case WssClass::Dram: return "DRAM";
  }
  return "?";
}

WssClass parse_wss_class(std::string_view s) {
  for (WssClass c : {WssClass::L1, WssClass::Llc, WssClass::Dram})
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown working-set class '" + std::string(s) + "' (expected L1, LLC or DRAM)");
}

std::uint64_t wss_bytes(WssClass c) noexcept {
  switch (c) {
    case WssClass::L1: return 8 * 1024;
    case WssClass::Llc: return 256 * 1024;
    case WssClass::Dram: return 16 * 1024 * 1024;
  }
  return 0;
}

CoreModel::CoreModel(std::string name, const L1Config& l1, const BwWriteConfig& gen, std::uint32_t mshrs,
                     kernel::Channel<MemTransaction>& responses, kernel::Channel<MemTransaction>& requests)
    : Model(std::move(name)), cfg_(l1), gen_(gen), l1_((validate(l1), l1.cache_config())), mshrs_(mshrs),
      responses_(bind_input(responses)), requests_(bind_output(requests)) {
  if (mshrs_ == 0) throw std::invalid_argument("core needs at least one MSHR");
}

void CoreModel::tick() {
  const std::uint64_t now = cycle();
  kernel::Token<MemTransaction> in = responses_.pop();
  if (in.payload && in.payload->kind == Access::Read) --outstanding_;

  if (outstanding_ < mshrs_ && outbound_.size() < 2) {
    const std::uint64_t sweep = gen_.sweep();
    const L1Outcome o = l1_access(l1_, cfg_, gen_.config().core, *bwwrite_step(gen_, now), now);
    ++counters_.writes;
    if (per_sweep_.size() <= sweep) per_sweep_.resize(sweep + 1, 0);
    if (o.fill) {
      outbound_.push_back(*o.fill);
      outbound_.back().id = next_id_++;
      ++outstanding_;
      ++counters_.fills;
      ++per_sweep_[sweep];
    }
    if (o.writeback) {
      outbound_.push_back(*o.writeback);
      outbound_.back().id = next_id_++;
      ++counters_.writebacks;
    }
  } else {
    ++counters_.stall_cycles;
  }
  counters_.l1 = l1_.counters();

  kernel::Token<MemTransaction> out;
  if (!outbound_.empty()) {
    out.payload = std::move(outbound_.front());
    out.payload->issue_cycle = now;
    outbound_.pop_front();
  }
  requests_.push(std::move(out));
}

std::uint64_t cpu_layer_cycles(const workload::LayerDescriptor& layer, std::uint32_t cores,
                               double ops_per_cycle) {
  if (layer.placement != workload::Placement::Cpu) throw workload::UnsupportedLayer(layer, "the CPU");
  if (cores == 0 || !(ops_per_cycle > 0.0)) throw std::invalid_argument("CPU throughput must be positive");
  const std::uint64_t ops = workload::layer_ops(layer);
  if (ops == 0) return 0;
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(ops) / (cores * ops_per_cycle) - 1e-9));
}

}  // namespace nvsim::cpu
