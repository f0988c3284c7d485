#include "nvsim/workload/network.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "nvsim/util/sectioned_text.hpp"

namespace nvsim::workload {

using util::ParseError;

std::string to_string(Dims d) {
  return std::to_string(d.h) + "x" + std::to_string(d.w) + "x" + std::to_string(d.c);
}

std::string_view to_string(LayerKind k) noexcept {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Pool: return "pool";
    case LayerKind::Upsample: return "upsample";
    case LayerKind::Route: return "route";
    case LayerKind::Shortcut: return "shortcut";
    case LayerKind::Yolo: return "yolo";
    case LayerKind::Convert: return "convert";
  }
  return "?";
}

std::string_view to_string(Placement p) noexcept { return p == Placement::Accel ? "accel" : "cpu"; }

Placement default_placement(LayerKind k) noexcept {
  switch (k) {
    case LayerKind::Upsample:
    case LayerKind::Yolo:
    case LayerKind::Convert: return Placement::Cpu;
    default: return Placement::Accel;
  }
}

ShapeMismatch::ShapeMismatch(std::size_t layer, const std::string& what)
    : std::runtime_error("layer " + std::to_string(layer) + ": " + what), layer_(layer) {}

UnsupportedLayer::UnsupportedLayer(const LayerDescriptor& l, const std::string& engine)
    : std::invalid_argument("layer " + std::to_string(l.index) + " (" + std::string(to_string(l.kind)) +
                            ") cannot run on " + engine) {}

namespace {

LayerKind parse_kind(const std::string& v, const std::string& src, std::size_t line) {
  for (LayerKind k : {LayerKind::Conv, LayerKind::Pool, LayerKind::Upsample, LayerKind::Route,
                      LayerKind::Shortcut, LayerKind::Yolo, LayerKind::Convert})
    if (to_string(k) == v) return k;
  throw ParseError(src, line, "unknown layer kind '" + v + "'");
}

std::uint32_t positive(const util::Entry& e, const std::string& src) {
  try {
    const auto v = util::to_uint(e.value);
    if (v == 0 || v > 1u << 20) throw std::invalid_argument("out of range");
    return static_cast<std::uint32_t>(v);
  } catch (const std::invalid_argument&) {
    throw ParseError(src, e.line, "'" + e.key + "' must be a positive integer, got '" + e.value + "'");
  }
}

Dims parse_dims(const util::Entry& e, const std::string& src) {
  const auto parts = util::split(e.value, 'x');
  if (parts.size() != 3) throw ParseError(src, e.line, "expected HxWxC, got '" + e.value + "'");
  Dims d;
  std::uint32_t* f[3] = {&d.h, &d.w, &d.c};
  for (std::size_t i = 0; i < 3; ++i) *f[i] = positive({e.key, parts[i], e.line}, src);
  return d;
}

bool allows(LayerKind k, std::string_view key) {
  if (key == "kind" || key == "out") return true;
  switch (k) {
    case LayerKind::Conv: return key == "k" || key == "s" || key == "filters";
    case LayerKind::Pool: return key == "k" || key == "s";
    case LayerKind::Upsample: return key == "s";
    case LayerKind::Route:
    case LayerKind::Shortcut: return key == "from";
    default: return false;
  }
}

// Output shape for kernel size k and stride s with same-padding.
std::uint32_t strided(std::uint32_t n, std::uint32_t s) { return (n - 1) / s + 1; }

void infer_shape(LayerDescriptor& l, const std::vector<LayerDescriptor>& prev, Dims input) {
  const Dims last = prev.empty() ? input : prev.back().out;
  switch (l.kind) {
    case LayerKind::Conv:
      l.in = last;
      l.out = {strided(last.h, l.s), strided(last.w, l.s), l.filters};
      break;
    case LayerKind::Pool:
      l.in = last;
      l.out = {strided(last.h, l.s), strided(last.w, l.s), last.c};
      break;
    case LayerKind::Upsample:
      l.in = last;
      l.out = {last.h * l.s, last.w * l.s, last.c};
      break;
    case LayerKind::Route: {
      Dims cat{prev[l.from.front()].out.h, prev[l.from.front()].out.w, 0};
      for (std::size_t f : l.from) {
        const Dims d = prev[f].out;
        if (d.h != cat.h || d.w != cat.w)
          throw ShapeMismatch(l.index, "route inputs differ in spatial size (" + to_string(d) + " vs " +
                                           to_string(cat) + ")");
        cat.c += d.c;
      }
      l.in = l.out = cat;
      break;
    }
    case LayerKind::Shortcut: {
      const Dims other = prev[l.from.front()].out;
      if (other != last)
        throw ShapeMismatch(l.index, "shortcut operands differ (" + to_string(last) + " vs " +
                                         to_string(other) + ")");
      l.in = l.out = last;
      break;
    }
    case LayerKind::Yolo:
    case LayerKind::Convert: l.in = l.out = last; break;
  }
}

Network build(const std::vector<util::Section>& sections, const std::string& src) {
  Network net;
  if (sections.empty()) return net;
  const util::Section& head = sections.front();
  if (head.name != "net") throw ParseError(src, head.line, "first section must be [net]");
  bool have[3] = {false, false, false};
  for (const util::Entry& e : head.entries) {
    if (e.key == "height") net.input.h = positive(e, src), have[0] = true;
    else if (e.key == "width") net.input.w = positive(e, src), have[1] = true;
    else if (e.key == "channels") net.input.c = positive(e, src), have[2] = true;
    else throw ParseError(src, e.line, "unknown key '" + e.key + "' in [net]");
  }
  if (!have[0] || !have[1] || !have[2])
    throw ParseError(src, head.line, "[net] needs width, height and channels");

  for (std::size_t si = 1; si < sections.size(); ++si) {
    const util::Section& sec = sections[si];
    if (sec.name != "layer") throw ParseError(src, sec.line, "unexpected section [" + sec.name + "]");
    const util::Entry* kind = sec.find("kind");
    if (kind == nullptr) throw ParseError(src, sec.line, "layer without kind");

    LayerDescriptor l;
    l.index = net.layers.size();
    l.kind = parse_kind(kind->value, src, kind->line);
    l.placement = default_placement(l.kind);
    if (l.kind == LayerKind::Upsample) l.s = 2;
    const util::Entry* declared = nullptr;
    std::set<std::string> seen;
    for (const util::Entry& e : sec.entries) {
      if (!allows(l.kind, e.key))
        throw ParseError(src, e.line, "key '" + e.key + "' not valid for " + kind->value + " layer");
      if (!seen.insert(e.key).second) throw ParseError(src, e.line, "duplicate key '" + e.key + "'");
      if (e.key == "k") l.k = positive(e, src);
      else if (e.key == "s") l.s = positive(e, src);
      else if (e.key == "filters") l.filters = positive(e, src);
      else if (e.key == "out") declared = &e;
      else if (e.key == "from") {
        for (const std::string& part : util::split(e.value, ',')) {
          long long v = 0;
          try {
            v = util::to_int(part);
          } catch (const std::invalid_argument&) {
            throw ParseError(src, e.line, "bad layer reference '" + part + "'");
          }
          const long long abs = v < 0 ? static_cast<long long>(l.index) + v : v;
          if (abs < 0 || abs >= static_cast<long long>(l.index))
            throw ParseError(src, e.line, "reference '" + part + "' does not name an earlier layer");
          l.from.push_back(static_cast<std::size_t>(abs));
        }
      }
    }
    if (l.kind == LayerKind::Conv && l.filters == 0)
      throw ParseError(src, sec.line, "conv layer needs filters");
    if ((l.kind == LayerKind::Route && l.from.empty()) ||
        (l.kind == LayerKind::Shortcut && l.from.size() != 1))
      throw ParseError(src, sec.line, std::string(to_string(l.kind)) + " layer needs from");
    if (l.kind == LayerKind::Shortcut && l.index == 0)
      throw ParseError(src, sec.line, "shortcut cannot be the first layer");

    infer_shape(l, net.layers, net.input);
    if (declared != nullptr) {
      const Dims d = parse_dims(*declared, src);
      if (d != l.out)
        throw ShapeMismatch(l.index, "declared out " + to_string(d) + " but shape arithmetic gives " +
                                         to_string(l.out) + " (line " + std::to_string(declared->line) +
                                         ")");
    }
    net.layers.push_back(std::move(l));
  }
  return net;
}

}  // namespace

Network parse_network(std::istream& in, const std::string& source) {
  return build(util::parse_sections(in, source), source);
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open network file '" + path.string() + "'");
  return parse_network(f, path.string());
}

std::string serialize_network(const Network& net) {
  std::ostringstream o;
  o << "[net]\nwidth=" << net.input.w << "\nheight=" << net.input.h << "\nchannels=" << net.input.c << "\n";
  for (const LayerDescriptor& l : net.layers) {
    if (l.inserted) continue;
    o << "\n[layer]\nkind=" << to_string(l.kind) << "\n";
    if (allows(l.kind, "k")) o << "k=" << l.k << "\n";
    if (allows(l.kind, "s")) o << "s=" << l.s << "\n";
    if (l.kind == LayerKind::Conv) o << "filters=" << l.filters << "\n";
    if (!l.from.empty()) {
      o << "from=";
      for (std::size_t i = 0; i < l.from.size(); ++i) o << (i ? "," : "") << l.from[i];
      o << "\n";
    }
    o << "out=" << to_string(l.out) << "\n";
  }
  return o.str();
}

std::uint64_t conv_macs(const LayerDescriptor& l) noexcept {
  if (l.kind != LayerKind::Conv) return 0;
  return std::uint64_t{l.k} * l.k * l.in.c * l.out.elements();
}

std::uint64_t layer_ops(const LayerDescriptor& l) noexcept {
  switch (l.kind) {
    case LayerKind::Conv: return 2 * conv_macs(l);
    case LayerKind::Pool: return std::uint64_t{l.k} * l.k * l.out.elements();
    case LayerKind::Route: return 0;
    default: return l.out.elements();
  }
}

std::uint64_t total_ops(const Network& net) noexcept {
  std::uint64_t sum = 0;
  for (const LayerDescriptor& l : net.layers) sum += layer_ops(l);
  return sum;
}

std::vector<std::size_t> producers(const LayerDescriptor& l) {
  if (l.kind == LayerKind::Route) return l.from;
  if (l.index == 0) return {};
  std::vector<std::size_t> p{l.index - 1};
  if (l.kind == LayerKind::Shortcut)
    for (std::size_t f : l.from)
      if (f != l.index - 1) p.push_back(f);
  return p;
}

Partition partition(const Network& net) {
  Partition out;
  const std::size_t n = net.layers.size();
  std::vector<bool> consumed(n, false);
  // Producers already converted towards each side, so a tensor crossing the
  // boundary to several consumers is converted once.
  std::set<std::size_t> to_accel, to_cpu;
  bool input_converted = false;

  auto make_convert = [&](std::size_t at, Dims d) {
    LayerDescriptor c;
    c.index = at;
    c.kind = LayerKind::Convert;
    c.in = c.out = d;
    c.placement = Placement::Cpu;
    c.inserted = true;
    ++out.inserted_converts;
    return c;
  };

  for (const LayerDescriptor& l : net.layers) {
    const auto prods = producers(l);
    if (prods.empty() && l.placement == Placement::Accel && !input_converted) {
      out.cpu.push_back(make_convert(l.index, net.input));
      input_converted = true;
    }
    for (std::size_t p : prods) {
      consumed[p] = true;
      const LayerDescriptor& src = net.layers[p];
      if (src.placement == l.placement) continue;
      auto& done = l.placement == Placement::Accel ? to_accel : to_cpu;
      if (done.insert(p).second) out.cpu.push_back(make_convert(l.index, src.out));
    }
    (l.placement == Placement::Accel ? out.accel : out.cpu).push_back(l);
  }
  for (const LayerDescriptor& l : net.layers)
    if (!consumed[l.index] && l.placement == Placement::Accel)
      out.cpu.push_back(make_convert(n, l.out));
  return out;
}

}  // namespace nvsim::workload
