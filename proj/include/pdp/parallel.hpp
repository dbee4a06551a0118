#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace pdp {

inline unsigned worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Deterministic chunked map: fn(chunk_index, begin, end) -> Partial, with
// item indexes global. Partials land in chunk order, so any fold over the
// returned vector is independent of the thread count.
template <typename Partial, typename Fn>
std::vector<Partial> map_chunks(std::int64_t total, std::int64_t chunk_size,
                                Fn&& fn) {
    const std::int64_t n_chunks =
        total <= 0 ? 0 : (total + chunk_size - 1) / chunk_size;
    std::vector<Partial> partials(static_cast<std::size_t>(n_chunks));
    std::atomic<std::int64_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::int64_t ci = next.fetch_add(1);
            if (ci >= n_chunks) return;
            const std::int64_t begin = ci * chunk_size;
            const std::int64_t end = std::min(begin + chunk_size, total);
            partials[static_cast<std::size_t>(ci)] = fn(ci, begin, end);
        }
    };
    const unsigned threads =
        std::min<std::int64_t>(worker_count(), std::max<std::int64_t>(n_chunks, 1));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return partials;
}

}  // namespace pdp
