// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any
// criterion fails. argv[1] is the source tree (for networks/).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "nvsim/harness/experiments.hpp"
#include "nvsim/memsys/cache.hpp"
#include "nvsim/memsys/dram.hpp"
#include "nvsim/workload/network.hpp"
#include "support/cache_oracle.hpp"
#include "support/dram_oracle.hpp"
#include "support/pipeline.hpp"

namespace {

using namespace nvsim;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::filesystem::path g_root;

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Verdict stall_invariance() {
  testing::Ring ref;
  const kernel::SimStats want = ref.sim.run(1000);
  std::mt19937_64 pick(2024);
  const auto t0 = Clock::now();
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    testing::Ring r;
    kernel::RunOptions o;
    o.order = trial % 2 ? kernel::HostOrder::Shuffled : kernel::HostOrder::RoundRobin;
    o.stall_probability = std::uniform_real_distribution<>(0.0, 0.95)(pick);
    o.seed = pick();
    const kernel::SimStats got = r.sim.run(1000, o);
    if (!(got == want) || r.sink.seen != ref.sink.seen || r.box->edges != 1000) ++bad;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {bad == 0 && secs < 60, fmt("1000 stall patterns, %.0f mismatches, %.2f s", bad, secs)};
}

Verdict cache_oracle() {
  std::mt19937_64 rng(99);
  const std::uint32_t blocks[] = {32, 64, 128};
  const auto t0 = Clock::now();
  std::uint64_t mismatches = 0, accesses = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint32_t block = blocks[trial % 3];
    const std::uint32_t ways = 1 + rng() % 16;
    const std::uint32_t sets = 2u << (rng() % 12);  // 2 .. 4096
    memsys::CacheState c(memsys::CacheConfig{sets, ways, block, 20, true});
    testing::ListLru o(sets, ways, block);
    const std::uint64_t footprint = std::uint64_t{sets} * ways * block * (1 + rng() % 4);
    for (auto [a, w] : testing::random_trace(rng, 10'000, footprint)) {
      const std::uint64_t addr = a / block * block;
      const auto got = c.access(addr, w ? memsys::Access::Write : memsys::Access::Read);
      const auto exp = o.access(addr, w);
      mismatches += got.hit != exp.hit || got.writeback.has_value() != exp.writeback;
      ++accesses;
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {mismatches == 0 && secs < 120,
          fmt("%.0f accesses over 100 geometries, %.0f mismatches, %.2f s", accesses, mismatches, secs)};
}

Verdict lru_inclusion() {
  std::mt19937_64 rng(5);
  const auto trace = testing::random_trace(rng, 50'000, 4u << 20);
  std::uint64_t prev = UINT64_MAX;
  bool mono = true;
  std::string series;
  for (std::uint32_t kib = 8; kib <= 1024; kib *= 2) {
    memsys::CacheState c(memsys::CacheConfig{1, kib * 1024 / 64, 64, 20, true});
    for (auto [a, w] : trace) c.access(a, w ? memsys::Access::Write : memsys::Access::Read);
    mono = mono && c.counters().misses <= prev;
    prev = c.counters().misses;
    series += (series.empty() ? "" : " ") + std::to_string(prev);
  }
  return {mono, "misses 8..1024 KiB: " + series};
}

Verdict frfcfs() {
  using namespace testing;
  const DramConfig c = plain_timing();
  memsys::DramController d(c);
  d.keep_issue_log(true);
  d.enqueue(rd(1, addr_of(c, 0, 1, 5)), 0);  // opens row 1 of bank 0
  std::vector<MemTransaction> done;
  std::uint64_t cyc = 0;
  for (; !d.idle(); ++cyc) d.tick(cyc, done);
  d.enqueue(rd(0xA, addr_of(c, 0, 1)), cyc);
  d.enqueue(rd(0xB, addr_of(c, 0, 2)), cyc);
  d.enqueue(rd(0xC, addr_of(c, 0, 1, 1)), cyc);
  for (; !d.idle(); ++cyc) d.tick(cyc, done);
  const bool hand = d.issue_log() == std::vector<std::uint64_t>{1, 0xA, 0xC, 0xB};

  int bad = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    DramConfig rc = seed % 2 ? plain_timing() : DramConfig{};
    rc.queue_depth = 64;
    std::mt19937_64 rng(seed);
    memsys::DramController x(rc);
    x.keep_issue_log(true);
    OracleDram o(rc);
    const std::uint32_t sizes[] = {32, 64, 128};
    for (std::uint64_t i = 0; i < 20; ++i) {
      const MemTransaction t = rd(i + 1, addr_of(rc, rng() % 4, rng() % 3, rng() % 4), sizes[rng() % 3]);
      x.enqueue(t, 0);
      o.add(t);
    }
    std::vector<MemTransaction> out;
    for (std::uint64_t k = 0; !x.idle(); ++k) {
      x.tick(k, out);
      o.cycle(k);
    }
    bool same = x.issue_log().size() == o.issued.size();
    for (std::size_t i = 0; same && i < o.issued.size(); ++i)
      same = x.issue_log()[i] == o.issued[i].first && *out[i].complete_cycle == o.issued[i].second;
    bad += !same;
  }
  return {hand && bad == 0, std::string(hand ? "A,C,B" : "hand trace out of order") +
                                fmt("; 50 random 20-request queues, %.0f differ from oracle", bad)};
}

harness::ExperimentConfig tiny_config() {
  harness::ExperimentConfig c;
  c.network = g_root / "networks" / "tiny-64.net";
  return c;
}

struct SweepResult {
  harness::CsvTable table;
  double secs = 0;
  std::map<std::pair<std::uint64_t, std::uint32_t>, double> speedup;
};

const SweepResult& llc_sweep() {
  static const SweepResult r = [] {
    SweepResult s;
    const auto cfg = tiny_config();
    const auto t0 = Clock::now();
    s.table = harness::run_llc_sweep(cfg, workload::load_network(cfg.network));
    s.secs = std::chrono::duration<double>(Clock::now() - t0).count();
    for (const auto& row : s.table.rows)
      s.speedup[{std::stoull(row[0]), static_cast<std::uint32_t>(std::stoul(row[1]))}] = std::stod(row[3]);
    return s;
  }();
  return r;
}

Verdict block_trend() {
  const SweepResult& s = llc_sweep();
  const std::uint64_t cap = 1024 * 1024;
  const double s32 = s.speedup.at({cap, 32}), s64 = s.speedup.at({cap, 64}), s128 = s.speedup.at({cap, 128});
  const bool ok = s128 > s64 && s64 > s32 && s32 >= 0.95 && s32 <= 1.15 && s.secs < 300;
  return {ok, fmt("1 MiB: 32B %.4f, 64B %.4f, 128B %.4f; sweep %.1f s", s32, s64, s128, s.secs)};
}

Verdict capacity_flat() {
  const SweepResult& s = llc_sweep();
  double lo = 1e9, hi = 0;
  for (const auto& [k, v] : s.speedup)
    if (k.second == 64 && k.first >= 512 && k.first <= 4u * 1024 * 1024) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const double spread = (hi - lo) / hi;
  return {spread <= 0.15, fmt("64B speedup %.4f..%.4f, spread %.1f%% of max", lo, hi, 100 * spread)};
}

Verdict interference() {
  const auto cfg = tiny_config();
  const auto t0 = Clock::now();
  const harness::CsvTable t = harness::run_interference(cfg, workload::load_network(cfg.network));
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::map<std::string, std::vector<double>> by;
  for (const auto& r : t.rows)
    if (r[1] != "none") by[r[1]].push_back(std::stod(r[3]));
  bool a = by["L1"].size() == 4, b = true;
  for (double v : by["L1"]) a = a && std::fabs(v - 1.0) <= 0.01;
  for (const char* c : {"LLC", "DRAM"})
    for (std::size_t i = 1; i < by[c].size(); ++i) b = b && by[c][i] >= by[c][i - 1];
  const double llc4 = by["LLC"].back(), dram4 = by["DRAM"].back();
  const bool c = dram4 >= llc4, d = llc4 > 1.2 && dram4 > 1.2;
  std::string detail;
  for (const char* k : {"L1", "LLC", "DRAM"}) {
    detail += std::string(detail.empty() ? "" : "; ") + k;
    for (double v : by[k]) detail += fmt(" %.4f", v);
  }
  detail += fmt("; (a)%.0f (b)%.0f (c)%.0f (d)%.0f", a, b, c, d) + fmt(", %.1f s", secs);
  return {a && b && c && d && secs < 600, detail};
}

Verdict ops_accounting() {
  harness::ExperimentConfig cfg;
  cfg.network = g_root / "networks" / "yolov3-416.net";
  const auto net = workload::load_network(cfg.network);
  const double ops = static_cast<double>(workload::total_ops(net));
  const harness::FpsReport r = harness::run_fps(cfg, net);
  const bool ok = std::fabs(ops - 66e9) <= 0.05 * 66e9 && r.accel_ms() >= 5.0;
  return {ok, fmt("%.3f Gops (%.2f%% off 66), accelerator %.2f ms", ops / 1e9, 100 * (ops - 66e9) / 66e9, r.accel_ms())};
}

Verdict determinism() {
  const auto tmp = std::filesystem::temp_directory_path();
  const auto p1 = tmp / "nvsim_accept_a.csv", p2 = tmp / "nvsim_accept_b.csv";
  auto cfg = tiny_config();
  const auto net = workload::load_network(cfg.network);
  harness::emit_stats(llc_sweep().table, p1);
  harness::emit_stats(harness::run_llc_sweep(cfg, net), p2);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  const std::string a = slurp(p1), b = slurp(p2);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
  return {!a.empty() && a == b, fmt("two runs, %.0f bytes each, ", static_cast<double>(a.size())) +
                                    (a == b ? "identical" : "different")};
}

Verdict l1_filtering() {
  // One small accelerator layer; the co-runner streams for the whole lead.
  harness::PlatformConfig p;
  workload::LayerDescriptor l;
  l.kind = workload::LayerKind::Conv;
  l.in = l.out = {8, 8, 32};
  l.k = l.s = 1;
  l.filters = 32;
  const std::vector<accel::LayerJob> jobs = {accel::make_job(l, p.accel, accel::isolated_memory(l))};
  auto run = [&](std::uint64_t wss) {
    harness::RunRequest req;
    req.co_runners = {1, wss};
    req.lead_cycles = 200'000;
    return harness::simulate(p, jobs, req).cores.at(0);
  };
  const cpu::CoreCounters small = run(8 * 1024);
  const std::uint64_t warm = 8 * 1024 / 64;
  const bool a = small.fills == warm && small.writebacks == 0;

  const cpu::CoreCounters big = run(32 * 1024);
  const std::uint64_t per = 32 * 1024 / 64;
  const std::uint64_t sweeps = big.writes / per;
  // every write misses, so each full sweep issues wss/64 fills
  const bool b = sweeps >= 10 && big.fills == big.writes;
  const std::uint64_t l1_blocks = p.l1.capacity / 64;
  return {a && b, fmt("8 KiB: %.0f fills (warm-up %.0f), %.0f writebacks; ", small.fills, warm, small.writebacks) +
                      fmt("32 KiB: %.0f sweeps, %.0f fills per sweep, %.0f writebacks per sweep after L1 fills",
                          sweeps, static_cast<double>(big.fills) / (big.writes / static_cast<double>(per)),
                          static_cast<double>(big.writebacks) / ((big.writes - l1_blocks) / static_cast<double>(per)))};
}

}  // namespace

int main(int argc, char** argv) {
  g_root = argc > 1 ? argv[1] : ".";
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"stall invariance", stall_invariance},
      {"cache vs list oracle", cache_oracle},
      {"LRU inclusion", lru_inclusion},
      {"FR-FCFS schedule", frfcfs},
      {"block size trend at 1 MiB", block_trend},
      {"capacity insensitivity at 64 B", capacity_flat},
      {"co-runner interference trends", interference},
      {"operation accounting", ops_accounting},
      {"llc-sweep determinism", determinism},
      {"BwWrite L1 filtering", l1_filtering},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
