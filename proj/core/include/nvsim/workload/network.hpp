#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nvsim::workload {

struct Dims {
  std::uint32_t h = 0;
  std::uint32_t w = 0;
  std::uint32_t c = 0;

  std::uint64_t elements() const noexcept { return std::uint64_t{h} * w * c; }
  bool operator==(const Dims&) const = default;
};

std::string to_string(Dims d);

enum class LayerKind { Conv, Pool, Upsample, Route, Shortcut, Yolo, Convert };
enum class Placement { Accel, Cpu };

std::string_view to_string(LayerKind k) noexcept;
std::string_view to_string(Placement p) noexcept;
Placement default_placement(LayerKind k) noexcept;

struct LayerDescriptor {
  std::size_t index = 0;
  LayerKind kind = LayerKind::Conv;
  Dims in{};
  Dims out{};
  std::uint32_t k = 1;
  std::uint32_t s = 1;
  std::uint32_t filters = 0;
  /// Absolute indices of referenced layers (Route, Shortcut).
  std::vector<std::size_t> from;
  Placement placement = Placement::Accel;
  /// True for Convert layers added by partition().
  bool inserted = false;

  bool operator==(const LayerDescriptor&) const = default;
};

struct Network {
  Dims input{};
  std::vector<LayerDescriptor> layers;

  bool operator==(const Network&) const = default;
};

class ShapeMismatch final : public std::runtime_error {
 public:
  ShapeMismatch(std::size_t layer, const std::string& what);
  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

/// A layer handed to an engine that cannot execute its kind.
class UnsupportedLayer final : public std::invalid_argument {
 public:
  UnsupportedLayer(const LayerDescriptor& l, const std::string& engine);
};

/// Line-oriented description: a `[net]` section (width, height, channels)
/// followed by one `[layer]` section per layer with kind, k, s, filters, from
/// and an optional declared `out=HxWxC`. Unknown keys are errors.
/// Throws util::ParseError (with line) or ShapeMismatch.
Network parse_network(std::istream& in, const std::string& source = "<network>");
Network load_network(const std::filesystem::path& path);
std::string serialize_network(const Network& net);

/// Multiply-accumulates of a convolution (K*K*Cin*Cout*Hout*Wout); 0 otherwise.
std::uint64_t conv_macs(const LayerDescriptor& layer) noexcept;

/// Arithmetic operations of a layer: 2 per MAC for Conv, K*K per output
/// element for Pool, one per output element for Upsample, Yolo, Convert and
/// Shortcut, none for Route.
std::uint64_t layer_ops(const LayerDescriptor& layer) noexcept;
std::uint64_t total_ops(const Network& net) noexcept;

/// Indices of the layers whose outputs feed `layer`. Layer 0 reads the
/// network input, reported as an empty list.
std::vector<std::size_t> producers(const LayerDescriptor& layer);

struct Partition {
  std::vector<LayerDescriptor> accel;
  /// CPU layers in network order, with inserted Convert layers placed just
  /// before the layer that consumes the converted tensor.
  std::vector<LayerDescriptor> cpu;
  std::size_t inserted_converts = 0;
};

/// Splits layers by placement and inserts a Convert at each accelerator/CPU
/// hand-off, counting the network input and final outputs as CPU-side.
Partition partition(const Network& net);

}  // namespace nvsim::workload
