#include "nvsim/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "nvsim/util/sectioned_text.hpp"

namespace nvsim::harness {

namespace {

using util::to_bool;
using util::to_double;

template <class T>
T to_unsigned(std::string_view v) {
  const auto x = util::to_uint(v);
  if (x > std::numeric_limits<T>::max()) throw std::invalid_argument("value out of range: '" + std::string(v) + "'");
  return static_cast<T>(x);
}

template <class T, class F>
std::vector<T> list(std::string_view v, F conv) {
  std::vector<T> out;
  if (util::trim(v).empty()) return out;
  for (const std::string& item : util::split(v, ',')) out.push_back(conv(item));
  return out;
}

struct Key {
  const char* section;
  const char* name;
  std::function<void(ExperimentConfig&, const std::string&, const std::filesystem::path&)> set;
};

using Cfg = ExperimentConfig;
using Path = std::filesystem::path;

#define NV_KEY(sec, key, body) \
  Key { sec, key, [](Cfg & c, const std::string& v, const Path& base) { (void)base; body; } }

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = {
      NV_KEY("platform", "freq_ghz", c.platform.freq_ghz = to_double(v)),
      NV_KEY("platform", "cpu_cores", c.platform.cpu_cores = to_unsigned<std::uint32_t>(v)),
      NV_KEY("platform", "network", c.network = base.empty() ? Path(v) : (base / v).lexically_normal()),
      NV_KEY("platform", "output", c.output = base.empty() ? Path(v) : (base / v).lexically_normal()),
      NV_KEY("platform", "seed", c.seed = util::to_uint(v)),
      NV_KEY("platform", "ideal_memory", c.platform.ideal_memory = to_bool(v)),
      NV_KEY("platform", "host_order",
             if (v == "round_robin") c.platform.host_order = kernel::HostOrder::RoundRobin;
             else if (v == "shuffled") c.platform.host_order = kernel::HostOrder::Shuffled;
             else throw std::invalid_argument("host_order must be round_robin or shuffled")),
      NV_KEY("platform", "bus_latency", c.platform.mem.bus.latency = to_unsigned<std::uint32_t>(v)),
      NV_KEY("platform", "bus_bytes_per_cycle", c.platform.mem.bus.bytes_per_cycle = to_unsigned<std::uint32_t>(v)),
      NV_KEY("platform", "bus_grants_per_cycle",
             c.platform.mem.bus.grants_per_cycle = to_unsigned<std::uint32_t>(v)),

      NV_KEY("llc", "enabled", c.platform.mem.llc.enabled = to_bool(v)),
      NV_KEY("llc", "capacity", c.platform.llc_capacity = parse_bytes(v)),
      NV_KEY("llc", "ways", c.platform.mem.llc.ways = to_unsigned<std::uint32_t>(v)),
      NV_KEY("llc", "block_bytes", c.platform.mem.llc.block_bytes = to_unsigned<std::uint32_t>(v)),
      NV_KEY("llc", "hit_latency", c.platform.mem.llc.hit_latency = to_unsigned<std::uint32_t>(v)),
      NV_KEY("llc", "outbound_limit", c.platform.mem.llc_outbound_limit = to_unsigned<std::uint32_t>(v)),
      NV_KEY("llc", "direct_access_bytes", c.platform.mem.direct_access_bytes = to_unsigned<std::uint32_t>(v)),

      NV_KEY("dram", "ranks", c.platform.mem.dram.ranks = to_unsigned<std::uint32_t>(v)),
      NV_KEY("dram", "banks_per_rank", c.platform.mem.dram.banks_per_rank = to_unsigned<std::uint32_t>(v)),
      NV_KEY("dram", "row_bytes", c.platform.mem.dram.row_bytes = static_cast<std::uint32_t>(parse_bytes(v))),
      NV_KEY("dram", "burst_bytes", c.platform.mem.dram.burst_bytes = to_unsigned<std::uint32_t>(v)),
      NV_KEY("dram", "tRCD", c.platform.mem.dram.timings.tRCD = to_unsigned<std::uint32_t>(v)),
      NV_KEY("dram", "tRP", c.platform.mem.dram.timings.tRP = to_unsigned<std::uint32_t>(v)),
      NV_KEY("dram", "tCL", c.platform.mem.dram.timings.tCL = to_unsigned<std::uint32_t>(v)),
      NV_KEY("dram", "tBURST", c.platform.mem.dram.timings.tBURST = to_unsigned<std::uint32_t>(v)),
      NV_KEY("dram", "clock_ratio", c.platform.mem.dram.clock_ratio = to_unsigned<std::uint32_t>(v)),
      NV_KEY("dram", "queue_depth", c.platform.mem.dram.queue_depth = to_unsigned<std::uint32_t>(v)),
      NV_KEY("dram", "interleave_bytes", c.platform.mem.dram.map.interleave_bytes = to_unsigned<std::uint32_t>(v)),
      NV_KEY("dram", "max_bypass", c.platform.mem.dram.max_bypass = to_unsigned<std::uint32_t>(v)),

      NV_KEY("accel", "num_macs", c.platform.accel.num_macs = to_unsigned<std::uint32_t>(v)),
      NV_KEY("accel", "buffer_bytes", c.platform.accel.buffer_bytes = parse_bytes(v)),
      NV_KEY("accel", "min_burst", c.platform.accel.min_burst = to_unsigned<std::uint32_t>(v)),
      NV_KEY("accel", "max_burst", c.platform.accel.max_burst = to_unsigned<std::uint32_t>(v)),
      NV_KEY("accel", "compute_efficiency", c.platform.accel.compute_efficiency = to_double(v)),
      NV_KEY("accel", "max_outstanding", c.platform.accel.max_outstanding = to_unsigned<std::uint32_t>(v)),

      NV_KEY("cpu", "ops_per_cycle", c.platform.cpu_ops_per_cycle = to_double(v)),
      NV_KEY("cpu", "l1_capacity", c.platform.l1.capacity = parse_bytes(v)),
      NV_KEY("cpu", "l1_ways", c.platform.l1.ways = to_unsigned<std::uint32_t>(v)),
      NV_KEY("cpu", "l1_block_bytes", c.platform.l1.block_bytes = to_unsigned<std::uint32_t>(v)),
      NV_KEY("cpu", "mshrs", c.platform.core_mshrs = to_unsigned<std::uint32_t>(v)),
      NV_KEY("cpu", "stride", c.platform.bwwrite_stride = parse_bytes(v)),

      NV_KEY("sweep", "capacities", c.sweep.capacities = list<std::uint64_t>(v, parse_bytes)),
      NV_KEY("sweep", "block_sizes",
             c.sweep.block_sizes = list<std::uint32_t>(v, [](const std::string& s) { return to_unsigned<std::uint32_t>(s); })),
      NV_KEY("sweep", "co_runners",
             c.sweep.co_runners = list<std::uint32_t>(v, [](const std::string& s) { return to_unsigned<std::uint32_t>(s); })),
      NV_KEY("sweep", "wss_classes", c.sweep.wss_classes = list<cpu::WssClass>(v, [](const std::string& s) {
               return cpu::parse_wss_class(s);
             })),
      NV_KEY("sweep", "warmup_layers", c.sweep.warmup_layers = to_unsigned<std::uint32_t>(v)),
      NV_KEY("sweep", "corunner_lead_cycles", c.sweep.corunner_lead_cycles = to_unsigned<std::uint64_t>(v)),
  };
  return keys;
}

#undef NV_KEY

const Key* find_key(std::string_view section, std::string_view name) {
  for (const Key& k : registry())
    if (section == k.section && name == k.name) return &k;
  return nullptr;
}

bool known_section(std::string_view s) {
  const auto& r = registry();
  return std::any_of(r.begin(), r.end(), [&](const Key& k) { return s == k.section; });
}

}  // namespace

memsys::MemSystemConfig PlatformConfig::memory(std::uint32_t ports) const {
  memsys::MemSystemConfig m = mem;
  m.bus.ports = ports;
  const bool enabled = m.llc.enabled && llc_capacity > 0;
  if (llc_capacity > 0) {
    m.llc = memsys::geometry_for_capacity(llc_capacity, mem.llc.ways, mem.llc.block_bytes, mem.llc.hit_latency);
  }
  m.llc.enabled = enabled;
  return m;
}

void validate(const PlatformConfig& cfg) {
  if (!(cfg.freq_ghz > 0.0)) throw std::invalid_argument("platform.freq_ghz must be positive");
  if (cfg.cpu_cores == 0) throw std::invalid_argument("platform.cpu_cores must be positive");
  if (!(cfg.cpu_ops_per_cycle > 0.0)) throw std::invalid_argument("cpu.ops_per_cycle must be positive");
  if (cfg.core_mshrs == 0) throw std::invalid_argument("cpu.mshrs must be positive");
  if (cfg.bwwrite_stride == 0) throw std::invalid_argument("cpu.stride must be positive");
  if (cfg.mem.llc.enabled && cfg.llc_capacity == 0)
    throw std::invalid_argument("llc.capacity must be positive when the LLC is enabled");
  memsys::validate(cfg.memory(5));
  accel::validate(cfg.accel);
  cpu::validate(cfg.l1);
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.platform);
  for (std::uint64_t cap : cfg.sweep.capacities) {
    if (cap == 0) throw std::invalid_argument("sweep.capacities: capacity must be positive");
    for (std::uint32_t b : cfg.sweep.block_sizes.empty() ? std::vector<std::uint32_t>{cfg.platform.mem.llc.block_bytes}
                                                         : cfg.sweep.block_sizes) {
      PlatformConfig p = cfg.platform;
      p.llc_capacity = cap;
      p.mem.llc.block_bytes = b;
      p.mem.llc.enabled = true;
      try {
        memsys::validate(p.memory(5));
      } catch (const std::exception& e) {
        throw std::invalid_argument("sweep point capacity=" + std::to_string(cap) + " block=" + std::to_string(b) +
                                    ": " + e.what());
      }
    }
  }
  for (std::uint32_t b : cfg.sweep.block_sizes)
    if (b != 32 && b != 64 && b != 128) throw std::invalid_argument("sweep.block_sizes: expected 32, 64 or 128");
  for (std::uint32_t n : cfg.sweep.co_runners)
    if (n > 4) throw std::invalid_argument("sweep.co_runners: at most 4 co-runners");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Key& k : registry()) out.push_back(std::string(k.section) + "." + k.name);
  return out;
}

std::uint64_t parse_bytes(std::string_view s) {
  const std::string t = util::trim(s);
  std::size_t i = 0;
  while (i < t.size() && (std::isdigit(static_cast<unsigned char>(t[i])) || t[i] == '.')) ++i;
  if (i == 0) throw std::invalid_argument("not a byte size: '" + t + "'");
  const double whole = util::to_double(t.substr(0, i));
  std::string unit = util::trim(std::string_view(t).substr(i));
  std::transform(unit.begin(), unit.end(), unit.begin(), [](unsigned char c) { return std::tolower(c); });
  std::uint64_t mul = 1;
  if (unit.empty() || unit == "b")
    mul = 1;
  else if (unit == "k" || unit == "kb" || unit == "kib")
    mul = 1ull << 10;
  else if (unit == "m" || unit == "mb" || unit == "mib")
    mul = 1ull << 20;
  else if (unit == "g" || unit == "gb" || unit == "gib")
    mul = 1ull << 30;
  else
    throw std::invalid_argument("unknown size unit in '" + t + "'");
  const double bytes = whole * static_cast<double>(mul);
  if (bytes != std::floor(bytes) || bytes > 1e18) throw std::invalid_argument("not a whole byte count: '" + t + "'");
  return static_cast<std::uint64_t>(bytes);
}

ExperimentConfig parse_config(std::istream& in, const std::string& source, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  for (const util::Section& sec : util::parse_sections(in, source)) {
    if (!known_section(sec.name)) throw util::ParseError(source, sec.line, "unknown section [" + sec.name + "]");
    for (const util::Entry& e : sec.entries) {
      const Key* k = find_key(sec.name, e.key);
      if (k == nullptr) throw util::ParseError(source, e.line, "unknown key '" + e.key + "' in [" + sec.name + "]");
      try {
        k->set(cfg, e.value, base_dir);
      } catch (const std::invalid_argument& ex) {
        throw util::ParseError(source, e.line, sec.name + "." + e.key + ": " + ex.what());
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file '" + path.string() + "'");
  return parse_config(f, path.string(), path.parent_path());
}

void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq)
    throw std::invalid_argument("override must look like section.key=value, got '" + std::string(assignment) + "'");
  const std::string section = util::trim(assignment.substr(0, dot));
  const std::string key = util::trim(assignment.substr(dot + 1, eq - dot - 1));
  const Key* k = find_key(section, key);
  if (k == nullptr) throw std::invalid_argument("unknown parameter '" + section + "." + key + "'");
  try {
    k->set(cfg, util::trim(assignment.substr(eq + 1)), {});
  } catch (const std::invalid_argument& ex) {
    throw std::invalid_argument(section + "." + key + ": " + ex.what());
  }
}

}  // namespace nvsim::harness
