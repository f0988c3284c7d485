#include "nvsim/accel/accelerator.hpp"

#include <stdexcept>

namespace nvsim::accel {

using memsys::Access;
using memsys::MemTransaction;
using workload::Placement;

namespace {
constexpr std::uint64_t kRegionAlign = 4096;
constexpr std::uint64_t align_up(std::uint64_t v) noexcept { return (v + kRegionAlign - 1) / kRegionAlign * kRegionAlign; }
}  // namespace

std::uint64_t LayerJob::compute_total() const noexcept {
  std::uint64_t s = 0;
  for (const TileSpan& t : spans) s += t.compute;
  return s;
}

LayerJob make_job(const LayerDescriptor& layer, const AccelConfig& cfg, const LayerMemory& mem) {
  LayerJob job;
  job.layer = layer.index;
  job.schedule = tile_layer(layer, cfg, mem);
  job.bursts = gen_traffic(job.schedule, cfg);
  job.spans.resize(job.schedule.tiles.size());
  for (std::uint32_t i = 0; i < job.spans.size(); ++i) job.spans[i].compute = compute_cycles(job.schedule.tiles[i], cfg);
  // gen_traffic emits each tile's reads then its writes, tiles in order.
  std::uint32_t i = 0;
  const auto n = static_cast<std::uint32_t>(job.bursts.size());
  for (std::uint32_t t = 0; t < job.spans.size(); ++t) {
    auto& s = job.spans[t];
    s.read_begin = i;
    while (i < n && job.bursts[i].tile == t && job.bursts[i].kind == Access::Read) ++i;
    s.read_end = s.write_begin = i;
    while (i < n && job.bursts[i].tile == t) ++i;
    s.write_end = i;
  }
  return job;
}

NetworkMemory plan_memory(const workload::Network& net) {
  NetworkMemory plan;
  plan.layers.resize(net.layers.size());
  std::uint64_t wnext = kWeightBase;
  std::uint64_t anext = kActivationBase;
  auto alloc = [&](Dims d) {
    TensorRef r;
    r.parts.push_back({anext, d});
    anext += align_up(surface_bytes(d));
    return r;
  };
  const TensorRef input = alloc(net.input);
  for (const LayerDescriptor& l : net.layers) {
    LayerMemory& m = plan.layers[l.index];
    const TensorRef& prev = l.index == 0 ? input : plan.layers[l.index - 1].output;
    switch (l.kind) {
      case LayerKind::Route:
        for (std::size_t f : l.from)
          for (const auto& p : plan.layers[f].output.parts) m.output.parts.push_back(p);
        m.input = m.output;
        break;
      case LayerKind::Shortcut:
        m.input = m.output = prev;
        break;
      default:
        m.input = prev;
        m.output = alloc(l.out);
        break;
    }
    if (l.kind == LayerKind::Conv) {
      m.weights = wnext;
      wnext += align_up((l.out.c + kAtom - 1) / kAtom * kAtom * std::uint64_t{l.k} * l.k * l.in.c);
    }
  }
  plan.weight_bytes = wnext - kWeightBase;
  plan.activation_bytes = anext - kActivationBase;
  if (kWeightBase + plan.weight_bytes > kActivationBase)
    throw std::runtime_error("network weights overflow the weight region");
  return plan;
}

std::vector<LayerJob> make_jobs(const workload::Network& net, const AccelConfig& cfg) {
  validate(cfg);
  const NetworkMemory plan = plan_memory(net);
  std::vector<LayerJob> jobs;
  for (const LayerDescriptor& l : net.layers) {
    if (l.placement != Placement::Accel) continue;
    if (l.kind != LayerKind::Conv && l.kind != LayerKind::Pool) continue;
    jobs.push_back(make_job(l, cfg, plan.layers[l.index]));
  }
  return jobs;
}

std::uint64_t ideal_cycles(const std::vector<LayerJob>& jobs) noexcept {
  std::uint64_t s = 0;
  for (const LayerJob& j : jobs) s += j.compute_total();
  return s;
}

AcceleratorCore::AcceleratorCore(const AccelConfig& cfg, std::vector<LayerJob> jobs)
    : cfg_(cfg), jobs_(std::move(jobs)) {
  validate(cfg_);
  for (const LayerJob& j : jobs_)
    if (j.spans.empty()) throw std::invalid_argument("layer job without tiles");
}

void AcceleratorCore::start_layer() {
  const LayerJob& j = jobs_[job_];
  fetch_tile_ = 0;
  fetch_pos_ = 0;
  reads_done_.assign(j.spans.size(), 0);
  computed_ = 0;
  computing_ = false;
  write_queue_.clear();
  write_head_ = 0;
  writes_done_ = 0;
  writes_total_ = 0;
  for (const auto& s : j.spans) writes_total_ += s.write_end - s.write_begin;
  prefer_write_ = false;
  first_compute_ = true;
  cur_ = LayerResult{};
  cur_.layer = j.layer;
  cur_.start = now_ - 1;
  cur_.macs = j.schedule.total_macs();
  if (trace_on_) trace_index_.assign(j.bursts.size(), 0);
  started_ = true;
}

std::optional<MemTransaction> AcceleratorCore::clock_edge(std::optional<MemTransaction> in) {
  const std::uint64_t now = now_++;
  if (in) {
    if ((in->id >> 32) != job_ || !started_) throw std::logic_error("accelerator got a stray response");
    const auto idx = static_cast<std::uint32_t>(in->id & 0xffff'ffffu);
    const BurstTemplate& b = jobs_[job_].bursts.at(idx);
    if (b.kind == Access::Read)
      ++reads_done_[b.tile];
    else
      ++writes_done_;
    --outstanding_;
    if (trace_on_) trace_[trace_index_[idx]].complete = now;
  }
  if (done() || now < start_at_) return std::nullopt;
  if (!started_) start_layer();

  const LayerJob& j = jobs_[job_];
  const auto n = static_cast<std::uint32_t>(j.spans.size());
  if (computing_ && now >= compute_end_) {
    computing_ = false;
    const auto& s = j.spans[computed_];
    for (std::uint32_t w = s.write_begin; w < s.write_end; ++w) write_queue_.push_back(w);
    ++computed_;
  }
  if (!computing_ && computed_ < n) {
    const auto& s = j.spans[computed_];
    if (reads_done_[computed_] == s.read_end - s.read_begin && (fetch_tile_ > computed_)) {
      if (first_compute_) cur_.fill = now - cur_.start;
      first_compute_ = false;
      computing_ = true;
      compute_end_ = now + s.compute;
      cur_.compute += s.compute;
    }
  }
  if (computed_ == n && writes_done_ == writes_total_ && outstanding_ == 0) {
    cur_.end = now;
    cur_.drain = now - compute_end_;
    results_.push_back(cur_);
    if (callback_) callback_(cur_);
    ++job_;
    started_ = false;
    return std::nullopt;
  }
  return issue(now);
}

std::optional<MemTransaction> AcceleratorCore::issue(std::uint64_t now) {
  if (outstanding_ >= cfg_.max_outstanding) return std::nullopt;
  const LayerJob& j = jobs_[job_];
  const auto n = static_cast<std::uint32_t>(j.spans.size());
  // Two buffer halves: the tile being computed (or awaited) and the next one.
  const bool can_read = fetch_tile_ < n && fetch_tile_ <= computed_ + 1;
  const bool can_write = write_head_ < write_queue_.size();
  if (!can_read && !can_write) return std::nullopt;
  const bool write = can_write && (!can_read || prefer_write_);
  prefer_write_ = !write;

  std::uint32_t idx;
  if (write) {
    idx = write_queue_[write_head_++];
  } else {
    idx = j.spans[fetch_tile_].read_begin + fetch_pos_;
    ++fetch_pos_;
    while (fetch_tile_ < n && j.spans[fetch_tile_].read_begin + fetch_pos_ >= j.spans[fetch_tile_].read_end) {
      ++fetch_tile_;
      fetch_pos_ = 0;
    }
  }
  const BurstTemplate& b = j.bursts[idx];
  MemTransaction t;
  t.id = (std::uint64_t{job_} << 32) | idx;
  t.kind = b.kind;
  t.addr = b.addr;
  t.size = b.size;
  t.source = memsys::Source::accelerator();
  t.issue_cycle = now;
  ++outstanding_;
  (b.kind == Access::Read ? cur_.reads : cur_.writes) += 1;
  (b.kind == Access::Read ? cur_.bytes_read : cur_.bytes_written) += b.size;
  if (trace_on_) {
    trace_index_[idx] = trace_.size();
    trace_.push_back({j.layer, b.tile, b.kind, b.addr, b.size, now, 0});
  }
  return t;
}

}  // namespace nvsim::accel
