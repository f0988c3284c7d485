#include "nvsim/memsys/memory_system.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace nvsim::memsys {

void validate(const MemSystemConfig& cfg) {
  validate(cfg.llc);
  validate(cfg.dram);
  if (cfg.direct_access_bytes == 0 || !std::has_single_bit(cfg.direct_access_bytes))
    throw std::invalid_argument("direct_access_bytes must be a power of two");
  if (cfg.llc_outbound_limit < 2) throw std::invalid_argument("llc_outbound_limit must be >= 2");
}

MemoryPipeline::MemoryPipeline(const MemSystemConfig& cfg)
    : cfg_(cfg), bus_(cfg.bus), llc_(cfg.llc), dram_(cfg.dram),
      port_queues_(cfg.bus.ports), heads_(cfg.bus.ports), responses_(cfg.bus.ports),
      port_stats_(cfg.bus.ports) {
  validate(cfg_);
}

void MemoryPipeline::schedule(std::uint64_t cycle, EventKind kind, std::uint32_t slot) {
  events_.push({cycle, event_seq_++, kind, slot});
}

void MemoryPipeline::submit(std::size_t port, MemTransaction txn, std::uint64_t cycle) {
  if (port >= port_queues_.size()) throw std::out_of_range("memory port out of range");
  validate(txn);
  (void)cycle;
  std::uint32_t slot;
  if (free_slots_.empty()) {
    slot = static_cast<std::uint32_t>(slots_.size());
    slots_.emplace_back();
  } else {
    slot = free_slots_.back();
    free_slots_.pop_back();
  }
  PortStats& ps = port_stats_[port];
  (txn.kind == Access::Read ? ps.reads : ps.writes) += 1;
  ps.bytes += txn.size;
  slots_[slot] = {std::move(txn), static_cast<std::uint32_t>(port), 0};
  port_queues_[port].push_back(slot);
  ++queued_requests_;
  ++in_flight_;
}

void MemoryPipeline::push_outbound(std::uint64_t ready, Access kind, std::uint64_t addr,
                                   std::uint32_t bytes, Purpose purpose, std::uint32_t slot) {
  MemTransaction t;
  t.id = next_dram_id_++;
  t.kind = kind;
  t.addr = addr;
  t.size = bytes;
  t.source = Source::llc();
  t.issue_cycle = ready;
  dram_tags_.emplace(t.id, Tag{purpose, slot, addr});
  outbound_.push_back({ready, std::move(t), purpose, slot});
}

void MemoryPipeline::on_arrive(std::uint32_t slot, std::uint64_t cycle) {
  const MemTransaction& txn = slots_[slot].txn;
  const bool cached = cfg_.llc.enabled;
  const std::uint64_t unit = cached ? cfg_.llc.block_bytes : cfg_.direct_access_bytes;
  const std::uint64_t end = txn.addr + txn.size;
  std::uint32_t pieces = 0;
  for (std::uint64_t a = txn.addr; a < end;) {
    const std::uint64_t next = std::min(end, (a / unit + 1) * unit);
    const auto bytes = static_cast<std::uint32_t>(next - a);
    if (cached)
      llc_fifo_.push_back({slot, a, bytes, txn.kind});
    else
      push_outbound(cycle, txn.kind, a, bytes, Purpose::Direct, slot);
    ++pieces;
    a = next;
  }
  slots_[slot].remaining = pieces;
}

void MemoryPipeline::sub_done(std::uint32_t slot, std::uint64_t cycle) {
  if (--slots_[slot].remaining == 0) schedule(cycle + cfg_.bus.latency, EventKind::Respond, slot);
}

void MemoryPipeline::run_llc(std::uint64_t cycle) {
  if (llc_fifo_.empty()) return;
  const SubAccess s = llc_fifo_.front();
  const Probe pr = llc_.probe(s.addr);
  const std::size_t need = pr.hit ? 0 : 1 + (pr.victim_dirty ? 1 : 0);
  if (need > 0 && outbound_.size() + need > cfg_.llc_outbound_limit) return;
  llc_fifo_.pop_front();

  const AccessOutcome o = llc_.access(s.addr, s.kind);
  const std::uint64_t block = s.addr & ~std::uint64_t{cfg_.llc.block_bytes - 1};
  const std::uint64_t ready = cycle + o.latency;
  auto pending = fill_waiters_.find(block);
  if (o.hit) {
    if (pending != fill_waiters_.end())
      pending->second.push_back(s.slot);
    else
      schedule(ready, EventKind::SubDone, s.slot);
    return;
  }
  if (o.writeback) {
    push_outbound(ready, Access::Write, o.writeback->addr, o.writeback->bytes, Purpose::Writeback, 0);
    ++llc_writebacks_;
  }
  if (pending != fill_waiters_.end()) {
    pending->second.push_back(s.slot);
  } else if (s.kind == Access::Write && s.bytes == cfg_.llc.block_bytes) {
    // whole block overwritten: nothing to fetch
    schedule(ready, EventKind::SubDone, s.slot);
    ++llc_skipped_fills_;
  } else {
    fill_waiters_.emplace(block, std::vector<std::uint32_t>{s.slot});
    push_outbound(ready, Access::Read, o.fill->addr, o.fill->bytes, Purpose::Fill, 0);
    ++llc_fills_;
  }
}

void MemoryPipeline::drain_outbound(std::uint64_t cycle) {
  while (!outbound_.empty() && outbound_.front().ready <= cycle) {
    if (!dram_.enqueue(outbound_.front().txn, cycle)) break;
    outbound_.pop_front();
  }
}

void MemoryPipeline::advance(std::uint64_t cycle) {
  auto drain_events = [&] {
    while (!events_.empty() && events_.top().cycle <= cycle) {
      const Event e = events_.top();
      events_.pop();
      switch (e.kind) {
        case EventKind::Arrive: on_arrive(e.slot, cycle); break;
        case EventKind::SubDone: sub_done(e.slot, cycle); break;
        case EventKind::Respond: {
          Pending& p = slots_[e.slot];
          p.txn.complete_cycle = cycle;
          PortStats& ps = port_stats_[p.port];
          ++ps.completed;
          const std::uint64_t lat = cycle - p.txn.issue_cycle;
          ps.latency_sum += lat;
          ps.latency_max = std::max(ps.latency_max, lat);
          responses_[p.port].push_back(std::move(p.txn));
          free_slots_.push_back(e.slot);
          --in_flight_;
          break;
        }
      }
    }
  };

  drain_events();

  if (queued_requests_ > 0 && !bus_.busy(cycle)) {
    for (std::size_t p = 0; p < port_queues_.size(); ++p) {
      if (port_queues_[p].empty())
        heads_[p].reset();
      else
        heads_[p] = slots_[port_queues_[p].front()].txn;
    }
    for (const Grant& g : bus_.arbitrate(heads_, cycle)) {
      const std::uint32_t slot = port_queues_[g.port].front();
      port_queues_[g.port].pop_front();
      --queued_requests_;
      schedule(g.arrival_cycle, EventKind::Arrive, slot);
    }
  }

  if (cfg_.llc.enabled) run_llc(cycle);
  drain_outbound(cycle);

  if (!dram_.idle()) {
    dram_done_.clear();
    dram_.tick(cycle, dram_done_);
    for (const MemTransaction& t : dram_done_) {
      auto it = dram_tags_.find(t.id);
      const Tag tag = it->second;
      dram_tags_.erase(it);
      switch (tag.purpose) {
        case Purpose::Fill: {
          auto w = fill_waiters_.find(tag.block);
          std::vector<std::uint32_t> waiters = std::move(w->second);
          fill_waiters_.erase(w);
          for (std::uint32_t slot : waiters) sub_done(slot, cycle);
          break;
        }
        case Purpose::Direct: sub_done(tag.slot, cycle); break;
        case Purpose::Writeback: break;
      }
    }
  }

  drain_events();
}

std::optional<MemTransaction> MemoryPipeline::pop_response(std::size_t port) {
  auto& q = responses_.at(port);
  if (q.empty()) return std::nullopt;
  MemTransaction t = std::move(q.front());
  q.pop_front();
  return t;
}

bool MemoryPipeline::idle() const noexcept {
  if (in_flight_ != 0 || !outbound_.empty() || !dram_.idle()) return false;
  return std::all_of(responses_.begin(), responses_.end(), [](const auto& q) { return q.empty(); });
}

MemSystemStats MemoryPipeline::stats() const {
  MemSystemStats s;
  s.ports = port_stats_;
  s.llc = llc_.counters();
  s.llc_fills = llc_fills_;
  s.llc_skipped_fills = llc_skipped_fills_;
  s.llc_writebacks = llc_writebacks_;
  s.dram = dram_.counters();
  s.dram_transactions = s.dram.reads + s.dram.writes;
  s.bus_busy_cycles = bus_.busy_cycles();
  return s;
}

MemorySystemModel::MemorySystemModel(std::string name, const MemSystemConfig& cfg,
                                     std::vector<MemPort> ports)
    : Model(std::move(name)), pipe_(cfg), ports_(std::move(ports)) {
  if (ports_.size() != cfg.bus.ports)
    throw std::invalid_argument("memory system port count must match bus ports");
  for (MemPort& p : ports_) {
    if (p.requests == nullptr || p.responses == nullptr)
      throw std::invalid_argument("memory port needs both channels");
    bind_input(*p.requests);
    bind_output(*p.responses);
  }
}

void MemorySystemModel::tick() {
  const std::uint64_t now = cycle();
  for (std::size_t p = 0; p < ports_.size(); ++p) {
    kernel::Token<MemTransaction> t = ports_[p].requests->pop();
    if (t.payload) pipe_.submit(p, std::move(*t.payload), now);
  }
  pipe_.advance(now);
  for (std::size_t p = 0; p < ports_.size(); ++p)
    ports_[p].responses->push(kernel::Token<MemTransaction>{pipe_.pop_response(p)});
}

}  // namespace nvsim::memsys
