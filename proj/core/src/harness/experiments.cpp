#include "nvsim/harness/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "nvsim/kernel/simulator.hpp"

namespace nvsim::harness {

namespace {

using memsys::MemTransaction;
using TxnChannel = kernel::Channel<MemTransaction>;

constexpr std::uint64_t kHorizonChunk = 1 << 14;


}  // namespace

std::uint64_t SimStats::timed_cycles(std::size_t warmup) const noexcept {
  std::uint64_t s = 0;
  for (std::size_t i = warmup < layers.size() ? warmup : 0; i < layers.size(); ++i) s += layers[i].total();
  return s;
}

std::vector<accel::LayerJob> accelerator_jobs(const PlatformConfig& platform, const workload::Network& net) {
  return accel::make_jobs(net, platform.accel);
}

SimStats simulate(const PlatformConfig& platform, const std::vector<accel::LayerJob>& jobs, const RunRequest& req) {
  validate(platform);
  if (req.co_runners.count > 4) throw std::invalid_argument("at most 4 co-runners are supported");
  SimStats out;
  if (platform.ideal_memory) {
    std::uint64_t t = 0;
    for (const accel::LayerJob& j : jobs) {
      accel::LayerResult r;
      r.layer = j.layer;
      r.start = t;
      r.compute = j.compute_total();
      r.macs = j.schedule.total_macs();
      t += r.compute;
      r.end = t;
      out.layers.push_back(r);
    }
    out.total_cycles = out.accel_cycles = t;
    return out;
  }

  const std::uint32_t ports = 1 + req.co_runners.count;
  std::vector<std::unique_ptr<TxnChannel>> requests, responses;
  for (std::uint32_t p = 0; p < ports; ++p) {
    const std::string tag = p == 0 ? "accel" : "core" + std::to_string(p - 1);
    requests.push_back(std::make_unique<TxnChannel>(tag + ".req", 1));
    responses.push_back(std::make_unique<TxnChannel>(tag + ".resp", 1));
    // Break the master/memory loop: masters see an empty response on cycle 0.
    responses.back()->seed(1);
  }

  auto core_box = std::make_unique<accel::AcceleratorCore>(platform.accel, jobs);
  accel::AcceleratorCore* engine = core_box.get();
  engine->keep_trace(req.trace);
  engine->start_at(req.lead_cycles);
  auto engine_model = kernel::wrap_gated<MemTransaction, MemTransaction>(
      "accel", std::move(core_box), *responses[0], *requests[0]);

  std::vector<std::unique_ptr<cpu::CoreModel>> cores;
  for (std::uint32_t i = 0; i < req.co_runners.count; ++i) {
    cpu::BwWriteConfig g;
    g.wss = req.co_runners.wss;
    g.stride = platform.bwwrite_stride;
    g.core = static_cast<std::uint8_t>(i);
    g.start_addr = cpu::core_region(g.core);
    cores.push_back(std::make_unique<cpu::CoreModel>("core" + std::to_string(i), platform.l1, g,
                                                     platform.core_mshrs, *responses[i + 1], *requests[i + 1]));
  }

  std::vector<memsys::MemPort> mports;
  for (std::uint32_t p = 0; p < ports; ++p) mports.push_back({requests[p].get(), responses[p].get()});
  memsys::MemorySystemModel memory("memory", platform.memory(ports), std::move(mports));

  // Masters before memory so one host sweep advances every model by a cycle.
  kernel::Simulator sim;
  sim.add(*engine_model);
  for (auto& c : cores) sim.add(*c);
  sim.add(memory);
  for (std::uint32_t p = 0; p < ports; ++p) {
    sim.add(*requests[p]);
    sim.add(*responses[p]);
  }

  kernel::RunOptions opts;
  opts.order = platform.host_order;
  opts.seed = req.seed;
  std::uint64_t horizon = 0;
  while (!engine->done()) {
    horizon += kHorizonChunk;
    sim.run(horizon, opts);
  }

  out.layers = engine->results();
  out.total_cycles = out.layers.empty() ? 0 : out.layers.back().end;
  for (const accel::LayerResult& r : out.layers) out.accel_cycles += r.total();
  out.memory = memory.pipeline().stats();
  for (const auto& c : cores) out.cores.push_back(c->counters());
  out.host_sweeps = sim.host_sweeps();
  if (req.trace) out.trace = engine->trace();
  return out;
}

std::string format_ratio(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string format_ratio(std::uint64_t num, std::uint64_t den) {
  return format_ratio(den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den));
}

void write_csv(const CsvTable& table, std::ostream& out) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

void emit_stats(const CsvTable& table, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_csv(table, f);
  f.flush();
  if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void emit_meta(const ExperimentConfig& cfg, const std::string& experiment, const std::filesystem::path& path) {
  const std::filesystem::path meta = path.string() + ".meta";
  std::ofstream f(meta, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + meta.string() + "' for writing");
  f << "experiment=" << experiment << "\n"
    << "network=" << cfg.network.filename().string() << "\n"
    << "seed=" << cfg.seed << "\n"
    << "frames=1\n"
    << "warmup_layers=" << (experiment == "fps" || experiment == "dump-trace" ? 0 : cfg.sweep.warmup_layers) << "\n";
  if (experiment == "interference") f << "corunner_lead_cycles=" << cfg.sweep.corunner_lead_cycles << "\n";
  f << "freq_ghz=" << format_ratio(cfg.platform.freq_ghz) << "\n";
  if (!f) throw std::runtime_error("write to '" + meta.string() + "' failed");
}

FpsReport run_fps(const ExperimentConfig& cfg, const workload::Network& net) {
  validate(cfg);
  const PlatformConfig& p = cfg.platform;
  const workload::Partition part = workload::partition(net);
  FpsReport r;
  r.freq_ghz = p.freq_ghz;
  r.accel_layers = part.accel.size();
  r.cpu_layers = part.cpu.size() - part.inserted_converts;
  r.inserted_converts = part.inserted_converts;
  r.total_ops = workload::total_ops(net);
  for (const workload::LayerDescriptor& l : part.cpu)
    r.cpu_cycles += cpu::cpu_layer_cycles(l, p.cpu_cores, p.cpu_ops_per_cycle);

  RunRequest req;
  req.seed = cfg.seed;
  const SimStats s = simulate(p, accelerator_jobs(p, net), req);
  r.accel_cycles = s.accel_cycles;
  r.layers = s.layers;
  r.total_cycles = r.accel_cycles + r.cpu_cycles;
  return r;
}

void print_fps(const FpsReport& r, std::ostream& out) {
  char buf[256];
  auto row = [&](const char* label, double ms, std::uint64_t cycles) {
    std::snprintf(buf, sizeof buf, "%-24s %10.3f ms  %14llu cycles\n", label, ms,
                  static_cast<unsigned long long>(cycles));
    out << buf;
  };
  std::snprintf(buf, sizeof buf, "layers: %zu accelerator, %zu cpu, %zu inserted converts; %.3f Gops\n",
                r.accel_layers, r.cpu_layers, r.inserted_converts, r.total_ops / 1e9);
  out << buf;
  row("accelerator time", r.accel_ms(), r.accel_cycles);
  row("cpu layer time", r.cpu_ms(), r.cpu_cycles);
  row("frame time", r.frame_ms(), r.total_cycles);
  std::snprintf(buf, sizeof buf, "%-24s %10.3f fps\n", "simulated throughput", r.fps());
  out << buf;
  out << "published reference (original hardware study, not simulated):\n";
  std::snprintf(buf, sizeof buf,
                "  accelerator %.1f fps, frame %.0f ms of which %.0f ms on the accelerator;"
                " GPU %.0f fps; %.0fx over scalar cores\n",
                PublishedFigures::accel_fps, PublishedFigures::frame_ms, PublishedFigures::accel_ms,
                PublishedFigures::gpu_fps, PublishedFigures::speedup_over_scalar);
  out << buf;
}

CsvTable fps_layers_csv(const FpsReport& r, const workload::Network& net) {
  CsvTable t;
  t.header = {"layer", "kind", "compute_cycles", "memory_cycles", "total_cycles"};
  for (const accel::LayerResult& l : r.layers)
    t.rows.push_back({std::to_string(l.layer), std::string(workload::to_string(net.layers.at(l.layer).kind)),
                      std::to_string(l.compute), std::to_string(l.memory()), std::to_string(l.total())});
  return t;
}

CsvTable run_llc_sweep(const ExperimentConfig& cfg, const workload::Network& net) {
  validate(cfg);
  CsvTable t;
  t.header = {"capacity", "block_bytes", "accel_cycles", "speedup_vs_no_llc"};
  PlatformConfig base = cfg.platform;
  base.mem.llc.enabled = false;
  RunRequest req;
  req.seed = cfg.seed;
  const std::size_t warm = cfg.sweep.warmup_layers;
  const std::uint64_t baseline = simulate(base, accelerator_jobs(base, net), req).timed_cycles(warm);
  t.rows.push_back({"0", "0", std::to_string(baseline), format_ratio(baseline, baseline)});

  const std::vector<std::uint32_t> blocks =
      cfg.sweep.block_sizes.empty() ? std::vector<std::uint32_t>{cfg.platform.mem.llc.block_bytes} : cfg.sweep.block_sizes;
  for (std::uint64_t cap : cfg.sweep.capacities)
    for (std::uint32_t b : blocks) {
      PlatformConfig p = cfg.platform;
      p.mem.llc.enabled = true;
      p.llc_capacity = cap;
      p.mem.llc.block_bytes = b;
      const std::uint64_t cycles = simulate(p, accelerator_jobs(p, net), req).timed_cycles(warm);
      t.rows.push_back({std::to_string(cap), std::to_string(b), std::to_string(cycles), format_ratio(baseline, cycles)});
    }
  return t;
}

CsvTable run_interference(const ExperimentConfig& cfg, const workload::Network& net) {
  validate(cfg);
  CsvTable t;
  t.header = {"co_runners", "wss_class", "accel_cycles", "normalized_time"};
  const PlatformConfig& p = cfg.platform;
  const auto jobs = accelerator_jobs(p, net);
  const std::size_t warm = cfg.sweep.warmup_layers;
  RunRequest req;
  req.seed = cfg.seed;
  const std::uint64_t solo = simulate(p, jobs, req).timed_cycles(warm);
  t.rows.push_back({"0", "none", std::to_string(solo), format_ratio(solo, solo)});
  for (cpu::WssClass c : cfg.sweep.wss_classes)
    for (std::uint32_t n : cfg.sweep.co_runners) {
      if (n == 0) continue;
      req.co_runners = {n, cpu::wss_bytes(c)};
      req.lead_cycles = cfg.sweep.corunner_lead_cycles;
      const std::uint64_t cycles = simulate(p, jobs, req).timed_cycles(warm);
      t.rows.push_back({std::to_string(n), std::string(cpu::to_string(c)), std::to_string(cycles),
                        format_ratio(cycles, solo)});
    }
  return t;
}

CsvTable dump_trace(const ExperimentConfig& cfg, const workload::Network& net) {
  validate(cfg);
  RunRequest req;
  req.seed = cfg.seed;
  req.trace = true;
  PlatformConfig p = cfg.platform;
  p.ideal_memory = false;
  const SimStats s = simulate(p, accelerator_jobs(p, net), req);
  CsvTable t;
  t.header = {"layer", "tile", "kind", "addr", "size", "issue", "complete"};
  char addr[32];
  for (const accel::TraceRecord& r : s.trace) {
    std::snprintf(addr, sizeof addr, "0x%llx", static_cast<unsigned long long>(r.addr));
    t.rows.push_back({std::to_string(r.layer), std::to_string(r.tile), r.kind == memsys::Access::Read ? "R" : "W", addr,
                      std::to_string(r.size), std::to_string(r.issue), std::to_string(r.complete)});
  }
  return t;
}

}  // namespace nvsim::harness
