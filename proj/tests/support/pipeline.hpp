// Small three-model ring used by the kernel tests and the acceptance run.
#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "nvsim/kernel/model.hpp"
#include "nvsim/kernel/simulator.hpp"

namespace nvsim::testing {

using kernel::Channel;
using kernel::Token;

/// Emits a pseudo-random word each cycle, mixed with whatever came back on
/// the feedback edge.
class Source final : public kernel::Model {
 public:
  Source(Channel<std::uint64_t>& fb, Channel<std::uint64_t>& out)
      : Model("source"), fb_(bind_input(fb)), out_(bind_output(out)) {}

 protected:
  void tick() override {
    Token<std::uint64_t> back = fb_.pop();
    state_ = state_ * 6364136223846793005ull + 1442695040888963407ull;
    if (back.payload) state_ ^= *back.payload;
    // every third cycle drives nothing
    if (cycle() % 3 == 2)
      out_.push({});
    else
      out_.push({state_ >> 16});
  }

 private:
  Channel<std::uint64_t>& fb_;
  Channel<std::uint64_t>& out_;
  std::uint64_t state_ = 7;
};

/// Black box with a four-deep delay line and a running sum.
class DelaySum final : public kernel::ClockedBlackBox<std::uint64_t, std::uint64_t> {
 public:
  std::optional<std::uint64_t> clock_edge(std::optional<std::uint64_t> in) override {
    ++edges;
    line_.push_back(in);
    if (in) sum += *in;
    if (line_.size() <= 4) return std::nullopt;
    auto v = line_.front();
    line_.pop_front();
    return v ? std::optional<std::uint64_t>{*v + sum} : std::nullopt;
  }
  std::uint64_t edges = 0;
  std::uint64_t sum = 0;

 private:
  std::deque<std::optional<std::uint64_t>> line_;
};

/// Records everything it sees and feeds a digest back to the source.
class Sink final : public kernel::Model {
 public:
  Sink(Channel<std::uint64_t>& in, Channel<std::uint64_t>& fb)
      : Model("sink"), in_(bind_input(in)), fb_(bind_output(fb)) {}

  std::vector<std::optional<std::uint64_t>> seen;

 protected:
  void tick() override {
    Token<std::uint64_t> t = in_.pop();
    seen.push_back(t.payload);
    fb_.push({t.payload ? std::optional<std::uint64_t>{*t.payload & 0xff} : std::nullopt});
  }

 private:
  Channel<std::uint64_t>& in_;
  Channel<std::uint64_t>& fb_;
};

struct Ring {
  Channel<std::uint64_t> a{"src->mid"}, b{"mid->sink"}, fb{"sink->src"};
  Source src{fb, a};
  DelaySum* box = nullptr;
  std::unique_ptr<kernel::GatedModel<std::uint64_t, std::uint64_t>> mid;
  Sink sink{b, fb};
  kernel::Simulator sim;

  explicit Ring(std::size_t feedback_tokens = 1) {
    auto d = std::make_unique<DelaySum>();
    box = d.get();
    mid = kernel::wrap_gated<std::uint64_t, std::uint64_t>("mid", std::move(d), a, b);
    fb.seed(feedback_tokens);
    sim.add(src);
    sim.add(*mid);
    sim.add(sink);
    sim.add(a);
    sim.add(b);
    sim.add(fb);
  }
};

}  // namespace nvsim::testing
