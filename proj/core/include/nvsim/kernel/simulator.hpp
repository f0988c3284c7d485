#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvsim/kernel/channel.hpp"
#include "nvsim/kernel/model.hpp"

namespace nvsim::kernel {

struct ChannelSnapshot {
  std::string name;
  std::size_t occupancy = 0;
  std::size_t capacity = 0;
  std::uint64_t enqueued = 0;
  std::uint64_t dequeued = 0;

  bool operator==(const ChannelSnapshot&) const = default;
};

struct ModelSnapshot {
  std::string name;
  std::uint64_t cycles = 0;

  bool operator==(const ModelSnapshot&) const = default;
};

/// Target-side result of a run. Host-side effort is kept out of this record
/// so that equal SimStats means equal simulated behaviour.
struct SimStats {
  std::vector<ModelSnapshot> models;
  std::vector<ChannelSnapshot> channels;

  bool operator==(const SimStats&) const = default;
};

class Deadlock final : public std::runtime_error {
 public:
  Deadlock(std::uint64_t cycle, std::vector<ChannelSnapshot> channels);
  std::uint64_t cycle() const noexcept { return cycle_; }
  const std::vector<ChannelSnapshot>& channels() const noexcept { return channels_; }

 private:
  std::uint64_t cycle_;
  std::vector<ChannelSnapshot> channels_;
};

class InvalidGraph final : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class HostOrder { RoundRobin, Shuffled };

/// Host-side scheduling knobs. None of them may change simulated results.
struct RunOptions {
  HostOrder order = HostOrder::RoundRobin;
  /// Probability that a host sweep skips a model that could have stepped.
  double stall_probability = 0.0;
  std::uint64_t seed = 0;
};

/// Drives a set of non-owned models and channels. Each host sweep offers every
/// model one step; sweeps repeat until all models reach the horizon.
class Simulator {
 public:
  void add(Model& m);
  void add(ChannelBase& c);

  /// Checks one producer and one consumer per channel, that every endpoint is
  /// registered, and that the model/channel graph is connected.
  void validate() const;

  /// Advances every model to exactly `horizon` target cycles. Can be called
  /// repeatedly with increasing horizons.
  SimStats run(std::uint64_t horizon, const RunOptions& opts = {});

  SimStats stats() const;
  std::uint64_t host_sweeps() const noexcept { return host_sweeps_; }
  const std::vector<Model*>& models() const noexcept { return models_; }

 private:
  std::vector<ChannelSnapshot> snapshot_channels() const;

  std::vector<Model*> models_;
  std::vector<ChannelBase*> channels_;
  std::uint64_t host_sweeps_ = 0;
  std::uint64_t salt_ = 0;
};

}  // namespace nvsim::kernel
