#include <gtest/gtest.h>

#include <deque>
#include <set>

#include "nvsim/accel/accelerator.hpp"
#include "nvsim/accel/tiling.hpp"
#include "nvsim/harness/experiments.hpp"

namespace {

using namespace nvsim;
using namespace nvsim::accel;
using workload::Network;

std::filesystem::path shipped(const char* name) { return std::filesystem::path(NVSIM_SOURCE_DIR) / "networks" / name; }

LayerDescriptor conv(Dims in, std::uint32_t k, std::uint32_t s, std::uint32_t filters) {
  LayerDescriptor l;
  l.kind = LayerKind::Conv;
  l.in = in;
  l.k = k;
  l.s = s;
  l.filters = filters;
  l.out = {(in.h - 1) / s + 1, (in.w - 1) / s + 1, filters};
  return l;
}

LayerDescriptor pool(Dims in, std::uint32_t k, std::uint32_t s) {
  LayerDescriptor l = conv(in, k, s, in.c);
  l.kind = LayerKind::Pool;
  l.filters = 0;
  return l;
}

// Drives the engine directly. Every request comes back `latency` edges later;
// at most one response is delivered per edge.
struct FixedLatencyMemory {
  std::uint64_t latency = 1;
  std::deque<std::pair<std::uint64_t, memsys::MemTransaction>> inflight;

  std::vector<LayerResult> run(AcceleratorCore& core) {
    for (std::uint64_t edge = 0; !core.done(); ++edge) {
      std::optional<memsys::MemTransaction> in;
      if (!inflight.empty() && inflight.front().first <= edge) {
        in = inflight.front().second;
        inflight.pop_front();
      }
      if (auto out = core.clock_edge(in)) inflight.push_back({edge + latency, *out});
      if (edge > 100'000'000) throw std::runtime_error("engine did not finish");
    }
    return core.results();
  }
};

std::uint64_t loop_nest_macs(const LayerDescriptor& l) {
  std::uint64_t n = 0;
  for (std::uint32_t oc = 0; oc < l.out.c; ++oc)
    for (std::uint32_t y = 0; y < l.out.h; ++y)
      for (std::uint32_t x = 0; x < l.out.w; ++x)
        for (std::uint32_t ic = 0; ic < l.in.c; ++ic)
          for (std::uint32_t k = 0; k < l.k * l.k; ++k) ++n;
  return n;
}

TEST(LayerMacs, Examples) {
  EXPECT_EQ(layer_macs(conv({1, 1, 1}, 1, 1, 1)), 1u);
  const LayerDescriptor l = conv({8, 8, 16}, 3, 1, 32);
  EXPECT_EQ(layer_macs(l), 294'912u);
  EXPECT_EQ(layer_macs(l), loop_nest_macs(l));
  EXPECT_EQ(layer_macs(conv({13, 9, 5}, 3, 2, 7)), loop_nest_macs(conv({13, 9, 5}, 3, 2, 7)));
  EXPECT_EQ(layer_macs(pool({8, 8, 16}, 2, 2)), 0u);
  LayerDescriptor up;
  up.kind = LayerKind::Upsample;
  EXPECT_THROW(layer_macs(up), workload::UnsupportedLayer);
}

TEST(Tiling, SmallLayerIsOneTile) {
  const LayerDescriptor l = conv({16, 16, 32}, 3, 1, 32);
  const TileSchedule s = tile_layer(l, AccelConfig{});
  ASSERT_EQ(s.tiles.size(), 1u);
  const Tile& t = s.tiles[0];
  EXPECT_EQ(t.weight_bytes, 9u * 32 * 32);
  EXPECT_EQ(t.input_bytes, 16u * 16 * 32);
  EXPECT_EQ(t.output_bytes, 16u * 16 * 32);
  EXPECT_EQ(t.mac_count, layer_macs(l));
}

TEST(Tiling, ThreeBuffersOfInputSplitByRows) {
  const AccelConfig cfg;
  const LayerDescriptor l = conv({192, 256, 32}, 1, 1, 32);  // 1.5 MiB of input
  const TileSchedule s = tile_layer(l, cfg);
  EXPECT_GE(s.tiles.size(), 3u);
  std::uint32_t next_row = 0;
  for (const Tile& t : s.tiles) {
    EXPECT_LE(t.resident_weight_bytes + t.input_bytes, cfg.buffer_bytes);
    EXPECT_EQ(t.row_begin, next_row);
    next_row = t.row_end;
  }
  EXPECT_EQ(next_row, l.out.h);
}

TEST(Tiling, WeightsStayResidentAcrossRowTiles) {
  const LayerDescriptor l = conv({104, 104, 128}, 3, 1, 256);
  const TileSchedule s = tile_layer(l, AccelConfig{});
  ASSERT_GT(s.tiles.size(), 1u);
  std::set<std::uint32_t> fetched;
  for (const Tile& t : s.tiles)
    if (t.weight_bytes > 0) EXPECT_TRUE(fetched.insert(t.group).second) << "group refetched";
  std::uint64_t weights = 0;
  for (const Tile& t : s.tiles) weights += t.weight_bytes;
  EXPECT_EQ(weights, 9u * 128 * 256);
}

TEST(Tiling, TooLargeLayer) {
  AccelConfig cfg;
  cfg.buffer_bytes = 4096;
  EXPECT_THROW(tile_layer(conv({8, 64, 64}, 3, 1, 64), cfg), LayerTooLarge);
}

TEST(Tiling, RouteAndShortcutHaveNoTiles) {
  LayerDescriptor r;
  r.kind = LayerKind::Route;
  r.in = r.out = {4, 4, 8};
  EXPECT_TRUE(tile_layer(r, AccelConfig{}).tiles.empty());
}

// Property over every YOLOv3 accelerator layer: MACs partition exactly, the
// resident set fits, outputs are written once, inputs are at least read once.
TEST(Tiling, YoloInvariants) {
  const Network net = workload::load_network(shipped("yolov3-416.net"));
  const AccelConfig cfg;
  const NetworkMemory plan = plan_memory(net);
  for (const auto& l : net.layers) {
    if (l.kind != LayerKind::Conv && l.kind != LayerKind::Pool) continue;
    const TileSchedule s = tile_layer(l, cfg, plan.layers[l.index]);
    EXPECT_EQ(s.total_macs(), layer_macs(l)) << "layer " << l.index;
    std::uint64_t out = 0, in = 0, w = 0;
    for (const Tile& t : s.tiles) {
      EXPECT_LE(t.resident_weight_bytes + t.input_bytes, cfg.buffer_bytes) << "layer " << l.index;
      out += t.output_bytes;
      in += t.input_bytes;
      w += t.weight_bytes;
    }
    EXPECT_EQ(out, surface_bytes(l.out));
    EXPECT_GE(in, surface_bytes(l.in));
    if (l.kind == LayerKind::Conv) EXPECT_EQ(w, (l.out.c + 31) / 32 * 32 * std::uint64_t{l.k} * l.k * l.in.c);
  }
}

TEST(Traffic, GreedyBursts) {
  TileSchedule s;
  Tile t;
  t.weight_reads.push_back({0x1000, 96});
  s.tiles.push_back(t);
  AccelConfig cfg;
  cfg.max_burst = 64;
  const auto b = gen_traffic(s, cfg);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].size, 64u);
  EXPECT_EQ(b[1].size, 32u);
  EXPECT_EQ(b[1].addr, 0x1040u);
  EXPECT_TRUE(gen_traffic(TileSchedule{}, cfg).empty());
}

TEST(Traffic, OrderWithinTile) {
  const TileSchedule s = tile_layer(conv({104, 104, 128}, 3, 1, 256), AccelConfig{});
  const auto bursts = gen_traffic(s, AccelConfig{});
  int phase = 0;
  std::uint32_t tile = 0;
  for (const auto& b : bursts) {
    if (b.tile != tile) {
      tile = b.tile;
      phase = 0;
    }
    const int p = static_cast<int>(b.region);
    EXPECT_GE(p, phase);
    phase = p;
  }
}

// Property: every burst over the whole YOLOv3 trace is legal and sequential
// within its segment; read bytes cover the schedule.
TEST(Traffic, YoloBurstLegality) {
  const AccelConfig cfg;
  const Network net = workload::load_network(shipped("yolov3-416.net"));
  for (const LayerJob& j : make_jobs(net, cfg)) {
    std::uint64_t read = 0, want = 0, written = 0;
    for (const Tile& t : j.schedule.tiles) want += t.weight_bytes + t.input_bytes;
    for (std::size_t i = 0; i < j.bursts.size(); ++i) {
      const BurstTemplate& b = j.bursts[i];
      ASSERT_GE(b.size, cfg.min_burst);
      ASSERT_LE(b.size, cfg.max_burst);
      ASSERT_EQ(b.size % 32, 0u);
      (b.kind == memsys::Access::Read ? read : written) += b.size;
      if (i > 0 && j.bursts[i - 1].size == cfg.max_burst && j.bursts[i - 1].region == b.region &&
          j.bursts[i - 1].tile == b.tile && b.addr != j.bursts[i - 1].addr + cfg.max_burst) {
        // a new segment starts only after a short burst or a segment edge
        EXPECT_EQ(j.bursts[i - 1].addr % 32, 0u);
      }
    }
    EXPECT_GE(read, want);
    EXPECT_EQ(written, surface_bytes(net.layers[j.layer].out));
  }
}

TEST(Compute, Formula) {
  AccelConfig full;
  full.compute_efficiency = 1.0;
  Tile t;
  t.mac_count = 2048;
  EXPECT_EQ(compute_cycles(t, full), 1u);
  t.mac_count = 2049;
  EXPECT_EQ(compute_cycles(t, full), 2u);
  t.mac_count = 294'912;
  EXPECT_EQ(compute_cycles(t, AccelConfig{}), 288u);
  Tile p;
  p.output_bytes = 100;
  EXPECT_EQ(compute_cycles(p, AccelConfig{}), 4u);
}

TEST(Config, Validation) {
  AccelConfig c;
  c.min_burst = 48;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.min_burst = 512;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.compute_efficiency = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Engine, ComputeBoundWithFastMemory) {
  // weights dominate traffic, but each row tile carries lots of MACs
  AccelConfig cfg;
  cfg.buffer_bytes = 160 * 1024;
  const LayerDescriptor l = conv({64, 64, 64}, 3, 1, 64);
  const LayerJob job = make_job(l, cfg, isolated_memory(l));
  ASSERT_GT(job.spans.size(), 2u);
  AcceleratorCore core(cfg, {job});
  FixedLatencyMemory mem;
  const auto r = mem.run(core);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].compute, job.compute_total());
  EXPECT_EQ(r[0].stall(), 0u);
  EXPECT_EQ(r[0].total(), r[0].compute + r[0].fill + r[0].drain);
  EXPECT_EQ(r[0].reads + r[0].writes, job.bursts.size());
}

TEST(Engine, SingleTileIsSerial) {
  const AccelConfig cfg;
  const LayerDescriptor l = conv({8, 8, 32}, 1, 1, 32);
  const LayerJob job = make_job(l, cfg, isolated_memory(l));
  ASSERT_EQ(job.spans.size(), 1u);
  for (std::uint64_t lat : {1ull, 50ull, 400ull}) {
    AcceleratorCore core(cfg, {job});
    FixedLatencyMemory mem{lat};
    const LayerResult r = mem.run(core)[0];
    const std::uint64_t nreads = job.spans[0].read_end - job.spans[0].read_begin;
    // fetch: all reads issued and the last one back; then compute; then writes
    EXPECT_GE(r.fill, lat + nreads - 1);
    EXPECT_EQ(r.compute, job.compute_total());
    EXPECT_GE(r.drain, lat);
    EXPECT_EQ(r.stall(), 0u);
  }
}

TEST(Engine, OverlapBeatsSerialSum) {
  AccelConfig cfg;
  cfg.buffer_bytes = 64 * 1024;
  const LayerDescriptor l = conv({64, 64, 32}, 3, 1, 64);
  const LayerJob job = make_job(l, cfg, isolated_memory(l));
  AcceleratorCore core(cfg, {job});
  FixedLatencyMemory mem{200};
  const LayerResult r = mem.run(core)[0];
  // the same traffic with free compute
  LayerJob memory_only = job;
  for (auto& s : memory_only.spans) s.compute = 0;
  AcceleratorCore bare(cfg, {memory_only});
  FixedLatencyMemory mem2{200};
  const std::uint64_t m = mem2.run(bare)[0].total();
  ASSERT_GT(job.spans.size(), 2u);
  EXPECT_LT(r.total(), job.compute_total() + m);
  EXPECT_GE(r.total(), job.compute_total());
  EXPECT_GE(r.total(), m);
}

TEST(Engine, StrayResponseRejected) {
  const LayerDescriptor l = conv({8, 8, 32}, 1, 1, 32);
  AcceleratorCore core(AccelConfig{}, {make_job(l, AccelConfig{}, isolated_memory(l))});
  memsys::MemTransaction t;
  t.id = 5ull << 32;
  EXPECT_THROW(core.clock_edge(t), std::logic_error);
}

TEST(Engine, OutstandingLimit) {
  AccelConfig cfg;
  cfg.max_outstanding = 3;
  const LayerDescriptor l = conv({32, 32, 64}, 3, 1, 64);
  AcceleratorCore core(cfg, {make_job(l, cfg, isolated_memory(l))});
  for (int e = 0; e < 10; ++e) core.clock_edge(std::nullopt);
  EXPECT_EQ(core.outstanding(), 3u);
}

TEST(Memory, PlanAliasesRouteAndShortcut) {
  const Network net = workload::load_network(shipped("yolov3-416.net"));
  const NetworkMemory plan = plan_memory(net);
  for (const auto& l : net.layers) {
    const LayerMemory& m = plan.layers[l.index];
    if (l.kind == LayerKind::Shortcut) {
      EXPECT_EQ(m.output.parts.front().base, plan.layers[l.index - 1].output.parts.front().base);
    }
    if (l.kind == LayerKind::Route) EXPECT_EQ(m.output.parts.size(), l.from.size());
    EXPECT_EQ(m.output.dims(), l.out);
  }
  EXPECT_LE(plan.weight_bytes, kActivationBase);
}

// End to end through the full memory system.
TEST(System, LlcCutsDramTransactions) {
  harness::PlatformConfig p;
  const LayerDescriptor l = conv({32, 32, 64}, 3, 1, 64);
  const std::vector<LayerJob> jobs = {make_job(l, p.accel, isolated_memory(l))};
  p.mem.llc.enabled = false;
  const std::uint64_t off = harness::simulate(p, jobs).memory.dram_transactions;
  p.mem.llc.enabled = true;
  p.mem.llc.block_bytes = 128;
  const std::uint64_t on = harness::simulate(p, jobs).memory.dram_transactions;
  EXPECT_LT(on, off);
}

// Properties on the tiny network: compute lower bound, write conservation,
// and run-to-run determinism of the burst trace.
TEST(System, TinyNetworkProperties) {
  const harness::PlatformConfig p;
  const Network net = workload::load_network(shipped("tiny-64.net"));
  const auto jobs = harness::accelerator_jobs(p, net);
  harness::RunRequest req;
  req.trace = true;
  const harness::SimStats a = harness::simulate(p, jobs, req);
  const harness::SimStats b = harness::simulate(p, jobs, req);
  ASSERT_EQ(a.layers.size(), jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const LayerResult& r = a.layers[i];
    EXPECT_GE(r.total(), (r.macs + p.accel.num_macs - 1) / p.accel.num_macs);
    EXPECT_EQ(r.bytes_written, surface_bytes(net.layers[r.layer].out));
    EXPECT_EQ(r.total(), b.layers[i].total());
  }
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].addr, b.trace[i].addr);
    EXPECT_EQ(a.trace[i].complete, b.trace[i].complete);
    EXPECT_GE(a.trace[i].complete, a.trace[i].issue);
  }
}

}  // namespace
