#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nvsim::kernel {

class Model;

/// One target-cycle quantum travelling over a channel. An empty payload is
/// still a valid token: it tells the consumer that the producer advanced one
/// cycle without driving anything.
template <class Payload>
struct Token {
  std::optional<Payload> payload;
};

/// Untyped view of a channel used by the scheduler. Occupancy is derived from
/// the enqueue/dequeue counters, so conservation holds by construction.
class ChannelBase {
 public:
  ChannelBase(std::string name, std::size_t capacity);
  virtual ~ChannelBase() = default;

  ChannelBase(const ChannelBase&) = delete;
  ChannelBase& operator=(const ChannelBase&) = delete;

  const std::string& name() const noexcept { return name_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t occupancy() const noexcept {
    return static_cast<std::size_t>(enqueued_ - dequeued_);
  }
  bool empty() const noexcept { return enqueued_ == dequeued_; }
  bool full() const noexcept { return occupancy() >= capacity_; }
  std::uint64_t enqueued() const noexcept { return enqueued_; }
  std::uint64_t dequeued() const noexcept { return dequeued_; }

  const Model* producer() const noexcept { return producer_; }
  const Model* consumer() const noexcept { return consumer_; }

 protected:
  std::uint64_t enqueued_ = 0;
  std::uint64_t dequeued_ = 0;

 private:
  friend class Model;
  void attach_producer(const Model* m);
  void attach_consumer(const Model* m);

  std::string name_;
  std::size_t capacity_;
  const Model* producer_ = nullptr;
  const Model* consumer_ = nullptr;
};

/// Bounded FIFO of tokens between exactly one producer and one consumer.
template <class Payload>
class Channel final : public ChannelBase {
 public:
  explicit Channel(std::string name, std::size_t capacity = 1)
      : ChannelBase(std::move(name), capacity), ring_(capacity) {}

  void push(Token<Payload> token) {
    if (full()) throw std::logic_error("push into full channel '" + name() + "'");
    ring_[enqueued_ % ring_.size()] = std::move(token);
    ++enqueued_;
  }

  Token<Payload> pop() {
    if (empty()) throw std::logic_error("pop from empty channel '" + name() + "'");
    auto& slot = ring_[dequeued_ % ring_.size()];
    Token<Payload> t = std::move(slot);
    slot.payload.reset();
    ++dequeued_;
    return t;
  }

  const Token<Payload>& front() const {
    if (empty()) throw std::logic_error("front of empty channel '" + name() + "'");
    return ring_[dequeued_ % ring_.size()];
  }

  /// Places start-up tokens (empty payload) to break a feedback loop.
  void seed(std::size_t count = 1) {
    for (std::size_t i = 0; i < count; ++i) push(Token<Payload>{});
  }

 private:
  std::vector<Token<Payload>> ring_;
};

}  // namespace nvsim::kernel
