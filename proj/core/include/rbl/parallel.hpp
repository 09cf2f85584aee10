#pragma once

#include <atomic>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace rbl {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent RNG stream for a logical work unit. Streams are derived from
/// (base_seed, stream_index) only, so results never depend on how work units
/// are assigned to threads.
inline std::mt19937_64 make_stream(std::uint64_t base_seed,
                                   std::uint64_t stream_index) {
  std::uint64_t s = base_seed ^ (0x9e3779b97f4a7c15ULL * (stream_index + 1));
  const std::uint64_t a = splitmix64(s);
  const std::uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Splits [0, n_items) into fixed chunks of `chunk_size`, maps each chunk to
/// an Accum with `chunk_fn(begin, end, chunk_index)`, and folds the chunk
/// results in chunk order. The fold order is fixed by the chunking, not by
/// thread scheduling, so the result is identical for any thread count.
template <typename Accum, typename ChunkFn, typename CombineFn>
Accum chunked_reduce(std::size_t n_items, std::size_t chunk_size, int threads,
                     Accum init, ChunkFn&& chunk_fn, CombineFn&& combine) {
  if (n_items == 0) return init;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
  const int n_threads =
      std::min<std::size_t>(resolve_threads(threads), n_chunks);

  std::vector<Accum> results(n_chunks, init);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) break;
      const std::size_t begin = c * chunk_size;
      const std::size_t end = std::min(begin + chunk_size, n_items);
      results[c] = chunk_fn(begin, end, c);
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  Accum total = std::move(init);
  for (std::size_t c = 0; c < n_chunks; ++c) combine(total, results[c]);
  return total;
}

/// Compensated (Kahan) accumulator used for order-stable trial aggregation.
struct KahanSum {
  double sum{0.0};
  double carry{0.0};

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

}  // namespace rbl
