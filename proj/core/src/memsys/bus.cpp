#include "nvsim/memsys/bus.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace nvsim::memsys {

RoundRobinArbiter::RoundRobinArbiter(std::size_t ports) : ports_(ports) {
  if (ports_ == 0) throw std::invalid_argument("arbiter needs at least one port");
}

std::vector<std::size_t> RoundRobinArbiter::arbitrate(std::span<const bool> requesting,
                                                      std::size_t max_grants) {
  if (requesting.size() != ports_) throw std::invalid_argument("request vector size != ports");
  std::vector<std::size_t> granted;
  for (std::size_t k = 0; k < ports_ && granted.size() < max_grants; ++k) {
    const std::size_t p = (next_ + k) % ports_;
    if (requesting[p]) granted.push_back(p);
  }
  if (!granted.empty()) next_ = (granted.back() + 1) % ports_;
  return granted;
}

FrontBus::FrontBus(const BusConfig& cfg)
    : cfg_(cfg), arbiter_(cfg.ports), grants_(cfg.ports, 0),
      requesting_(std::make_unique<bool[]>(cfg.ports)) {
  if (cfg_.grants_per_cycle == 0 || cfg_.bytes_per_cycle == 0)
    throw std::invalid_argument("bus needs positive grants_per_cycle and bytes_per_cycle");
}

std::uint32_t FrontBus::transfer_cycles(std::uint32_t bytes) const noexcept {
  return std::max<std::uint32_t>(1, (bytes + cfg_.bytes_per_cycle - 1) / cfg_.bytes_per_cycle);
}

std::vector<Grant> FrontBus::arbitrate(std::span<const std::optional<MemTransaction>> heads,
                                       std::uint64_t cycle) {
  if (heads.size() != cfg_.ports) throw std::invalid_argument("head vector size != bus ports");
  std::vector<Grant> out;
  if (busy(cycle)) return out;

  bool any = false;
  for (std::size_t p = 0; p < heads.size(); ++p) {
    requesting_[p] = heads[p].has_value();
    any = any || requesting_[p];
  }
  if (!any) return out;

  std::uint32_t occupancy = 0;
  for (std::size_t p : arbiter_.arbitrate(std::span<const bool>(requesting_.get(), cfg_.ports), cfg_.grants_per_cycle)) {
    const std::uint32_t xfer = transfer_cycles(heads[p]->size);
    occupancy = std::max(occupancy, xfer);
    out.push_back({p, xfer, cycle + xfer + cfg_.latency});
    ++grants_[p];
  }
  busy_until_ = cycle + occupancy;
  busy_cycles_ += occupancy;
  return out;
}

std::uint64_t FrontBus::max_wait(std::uint32_t max_bytes) const noexcept {
  const std::uint64_t rounds = (cfg_.ports + cfg_.grants_per_cycle - 1) / cfg_.grants_per_cycle;
  return rounds * transfer_cycles(max_bytes);
}

}  // namespace nvsim::memsys
