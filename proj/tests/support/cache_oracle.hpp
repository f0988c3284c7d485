#pragma once

#include <cstdint>
#include <list>
#include <random>
#include <utility>
#include <vector>

namespace nvsim::testing {

// Trace-driven reference: each set is a most-recent-first list of blocks.
class ListLru {
 public:
  ListLru(std::uint32_t sets, std::uint32_t ways, std::uint32_t block)
      : sets_(sets), ways_(ways), block_(block), lists_(sets) {}

  struct Result {
    bool hit;
    bool writeback;
  };

  Result access(std::uint64_t addr, bool write) {
    const std::uint64_t blk = addr / block_;
    auto& l = lists_[blk % sets_];
    for (auto it = l.begin(); it != l.end(); ++it)
      if (it->first == blk) {
        const bool dirty = it->second || write;
        l.erase(it);
        l.push_front({blk, dirty});
        return {true, false};
      }
    bool wb = false;
    if (l.size() == ways_) {
      wb = l.back().second;
      l.pop_back();
    }
    l.push_front({blk, write});
    return {false, wb};
  }

 private:
  std::uint32_t sets_, ways_, block_;
  std::vector<std::list<std::pair<std::uint64_t, bool>>> lists_;
};

std::vector<std::pair<std::uint64_t, bool>> random_trace(std::mt19937_64& rng, std::size_t n,
                                                         std::uint64_t footprint) {
  std::vector<std::pair<std::uint64_t, bool>> t;
  t.reserve(n);
  std::uniform_int_distribution<std::uint64_t> any(0, footprint - 1);
  std::uint64_t cursor = any(rng);
  for (std::size_t i = 0; i < n; ++i) {
    // mix of streaming, hot-spot reuse and random jumps
    const auto r = rng() % 10;
    if (r < 5)
      cursor = (cursor + 8 * (1 + rng() % 8)) % footprint;
    else if (r < 8)
      cursor = (rng() % 64) * 64;
    else
      cursor = any(rng);
    t.push_back({cursor, rng() % 3 == 0});
  }
  return t;
}

}  // namespace nvsim::testing
