#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nvsim/kernel/channel.hpp"

namespace nvsim::kernel {

/// Raised by Model::step() when the model cannot advance this host iteration.
/// This is a stall signal for the caller, not a simulation failure.
class WouldStall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputUnavailable final : public WouldStall {
 public:
  InputUnavailable(const std::string& model, const std::string& channel)
      : WouldStall("model '" + model + "' has no token on input '" + channel + "'"),
        channel_(channel) {}
  const std::string& channel() const noexcept { return channel_; }

 private:
  std::string channel_;
};

class OutputBlocked final : public WouldStall {
 public:
  OutputBlocked(const std::string& model, const std::string& channel)
      : WouldStall("model '" + model + "' output '" + channel + "' is full"),
        channel_(channel) {}
  const std::string& channel() const noexcept { return channel_; }

 private:
  std::string channel_;
};

enum class StepResult { Stepped, Stalled };

/// A decoupled target model. It advances exactly one target cycle per step,
/// consuming one token from every input and producing one on every output.
/// The enable flag mirrors a global register enable: it is asserted only when
/// every input holds a token and every output has room.
class Model {
 public:
  explicit Model(std::string name) : name_(std::move(name)) {}
  virtual ~Model() = default;

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const std::string& name() const noexcept { return name_; }
  std::uint64_t cycle() const noexcept { return cycle_; }
  bool enabled() const noexcept { return enabled_; }

  bool can_step() const noexcept;
  StepResult try_step();
  void step();

  std::span<ChannelBase* const> inputs() const noexcept { return inputs_; }
  std::span<ChannelBase* const> outputs() const noexcept { return outputs_; }

 protected:
  template <class P>
  Channel<P>& bind_input(Channel<P>& ch) {
    ch.attach_consumer(this);
    inputs_.push_back(&ch);
    return ch;
  }
  template <class P>
  Channel<P>& bind_output(Channel<P>& ch) {
    ch.attach_producer(this);
    outputs_.push_back(&ch);
    return ch;
  }

  /// One target cycle of behaviour. Must pop each input and push each output
  /// exactly once; the base class checks this.
  virtual void tick() = 0;

 private:
  void advance();

  std::string name_;
  std::uint64_t cycle_ = 0;
  bool enabled_ = false;
  std::vector<ChannelBase*> inputs_;
  std::vector<ChannelBase*> outputs_;
  std::vector<std::uint64_t> scratch_;
};

/// A black-box target that exposes only a clocked entry point: every call is
/// one rising edge. It has no per-register enable, so it can only be stalled
/// by withholding the clock.
template <class In, class Out>
class ClockedBlackBox {
 public:
  virtual ~ClockedBlackBox() = default;
  virtual std::optional<Out> clock_edge(std::optional<In> in) = 0;
};

/// Clock-gated wrapper: the gate opens only on host iterations where the
/// wrapped box can advance, so a stalled box sees no edge at all.
template <class In, class Out>
class GatedModel final : public Model {
 public:
  GatedModel(std::string name, std::unique_ptr<ClockedBlackBox<In, Out>> box,
             Channel<In>& in, Channel<Out>& out)
      : Model(std::move(name)), box_(std::move(box)), in_(bind_input(in)),
        out_(bind_output(out)) {
    if (!box_) throw std::invalid_argument("GatedModel: null black box");
  }

  std::uint64_t clock_edges() const noexcept { return edges_; }
  ClockedBlackBox<In, Out>& box() noexcept { return *box_; }
  const ClockedBlackBox<In, Out>& box() const noexcept { return *box_; }

 protected:
  void tick() override {
    Token<In> t = in_.pop();
    ++edges_;
    out_.push(Token<Out>{box_->clock_edge(std::move(t.payload))});
  }

 private:
  std::unique_ptr<ClockedBlackBox<In, Out>> box_;
  Channel<In>& in_;
  Channel<Out>& out_;
  std::uint64_t edges_ = 0;
};

template <class In, class Out>
std::unique_ptr<GatedModel<In, Out>> wrap_gated(std::string name,
                                                std::unique_ptr<ClockedBlackBox<In, Out>> box,
                                                Channel<In>& in, Channel<Out>& out) {
  return std::make_unique<GatedModel<In, Out>>(std::move(name), std::move(box), in, out);
}

}  // namespace nvsim::kernel
