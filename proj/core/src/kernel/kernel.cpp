#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>

#include "nvsim/kernel/channel.hpp"
#include "nvsim/kernel/model.hpp"
#include "nvsim/kernel/simulator.hpp"

namespace nvsim::kernel {

ChannelBase::ChannelBase(std::string name, std::size_t capacity)
    : name_(std::move(name)), capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("channel '" + name_ + "' needs capacity >= 1");
}

void ChannelBase::attach_producer(const Model* m) {
  if (producer_ != nullptr && producer_ != m)
    throw InvalidGraph("channel '" + name_ + "' already has a producer");
  producer_ = m;
}

void ChannelBase::attach_consumer(const Model* m) {
  if (consumer_ != nullptr && consumer_ != m)
    throw InvalidGraph("channel '" + name_ + "' already has a consumer");
  consumer_ = m;
}

bool Model::can_step() const noexcept {
  for (const ChannelBase* in : inputs_)
    if (in->empty()) return false;
  for (const ChannelBase* out : outputs_)
    if (out->full()) return false;
  return true;
}

StepResult Model::try_step() {
  enabled_ = can_step();
  if (!enabled_) return StepResult::Stalled;
  advance();
  return StepResult::Stepped;
}

void Model::step() {
  for (const ChannelBase* in : inputs_)
    if (in->empty()) {
      enabled_ = false;
      throw InputUnavailable(name_, in->name());
    }
  for (const ChannelBase* out : outputs_)
    if (out->full()) {
      enabled_ = false;
      throw OutputBlocked(name_, out->name());
    }
  enabled_ = true;
  advance();
}

void Model::advance() {
  scratch_.resize(inputs_.size() + outputs_.size());
  std::size_t k = 0;
  for (const ChannelBase* in : inputs_) scratch_[k++] = in->dequeued();
  for (const ChannelBase* out : outputs_) scratch_[k++] = out->enqueued();

  tick();

  k = 0;
  for (const ChannelBase* in : inputs_)
    if (in->dequeued() != scratch_[k++] + 1)
      throw std::logic_error("model '" + name_ + "' must consume exactly one token from '" +
                             in->name() + "' per cycle");
  for (const ChannelBase* out : outputs_)
    if (out->enqueued() != scratch_[k++] + 1)
      throw std::logic_error("model '" + name_ + "' must produce exactly one token on '" +
                             out->name() + "' per cycle");
  ++cycle_;
}

Deadlock::Deadlock(std::uint64_t cycle, std::vector<ChannelSnapshot> channels)
    : std::runtime_error("deadlock at target cycle " + std::to_string(cycle)),
      cycle_(cycle), channels_(std::move(channels)) {}

void Simulator::add(Model& m) {
  if (std::find(models_.begin(), models_.end(), &m) == models_.end()) models_.push_back(&m);
}

void Simulator::add(ChannelBase& c) {
  if (std::find(channels_.begin(), channels_.end(), &c) == channels_.end())
    channels_.push_back(&c);
}

void Simulator::validate() const {
  std::unordered_map<const Model*, std::size_t> index;
  for (std::size_t i = 0; i < models_.size(); ++i) index.emplace(models_[i], i);

  std::vector<std::size_t> parent(models_.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (const ChannelBase* c : channels_) {
    if (c->producer() == nullptr || c->consumer() == nullptr)
      throw InvalidGraph("channel '" + c->name() + "' needs exactly one producer and one consumer");
    auto p = index.find(c->producer());
    auto q = index.find(c->consumer());
    if (p == index.end() || q == index.end())
      throw InvalidGraph("channel '" + c->name() + "' connects an unregistered model");
    parent[find(p->second)] = find(q->second);
  }
  for (const Model* m : models_) {
    for (const ChannelBase* c : m->inputs())
      if (std::find(channels_.begin(), channels_.end(), c) == channels_.end())
        throw InvalidGraph("model '" + m->name() + "' reads unregistered channel '" + c->name() + "'");
    for (const ChannelBase* c : m->outputs())
      if (std::find(channels_.begin(), channels_.end(), c) == channels_.end())
        throw InvalidGraph("model '" + m->name() + "' writes unregistered channel '" + c->name() + "'");
  }
  for (std::size_t i = 1; i < models_.size(); ++i)
    if (find(i) != find(0)) throw InvalidGraph("model graph is not connected");
}

SimStats Simulator::run(std::uint64_t horizon, const RunOptions& opts) {
  validate();
  std::mt19937_64 rng(opts.seed ^ (0x9e3779b97f4a7c15ULL * ++salt_));
  std::bernoulli_distribution skip(std::clamp(opts.stall_probability, 0.0, 1.0));
  const bool inject = opts.stall_probability > 0.0;

  std::vector<Model*> order = models_;
  for (;;) {
    bool finished = true;
    for (const Model* m : order)
      if (m->cycle() < horizon) {
        finished = false;
        break;
      }
    if (finished) break;

    if (opts.order == HostOrder::Shuffled) std::shuffle(order.begin(), order.end(), rng);

    bool any_ready = false;
    for (Model* m : order) {
      if (m->cycle() >= horizon || !m->can_step()) continue;
      any_ready = true;
      if (inject && skip(rng)) continue;
      m->try_step();
    }
    ++host_sweeps_;

    if (!any_ready) {
      std::uint64_t stalled = horizon;
      for (const Model* m : order)
        if (m->cycle() < horizon) stalled = std::min(stalled, m->cycle());
      throw Deadlock(stalled, snapshot_channels());
    }
  }
  return stats();
}

std::vector<ChannelSnapshot> Simulator::snapshot_channels() const {
  std::vector<ChannelSnapshot> out;
  out.reserve(channels_.size());
  for (const ChannelBase* c : channels_)
    out.push_back({c->name(), c->occupancy(), c->capacity(), c->enqueued(), c->dequeued()});
  return out;
}

SimStats Simulator::stats() const {
  SimStats s;
  s.models.reserve(models_.size());
  for (const Model* m : models_) s.models.push_back({m->name(), m->cycle()});
  s.channels = snapshot_channels();
  return s;
}

}  // namespace nvsim::kernel
