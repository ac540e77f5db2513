#pragma once

// Fork-join data parallelism with deterministic reductions.
//
// Ranges are split into a fixed number of chunks that depends only on the
// range length and the configured worker count, each chunk is accumulated
// in index order, and partial results are combined sequentially in chunk
// order. Results are therefore bit-reproducible for a fixed worker count,
// independent of thread scheduling.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace grushin {

namespace detail {
inline std::atomic<int>& worker_count_slot() {
    static std::atomic<int> count{0};  // 0 = hardware concurrency
    return count;
}
}  // namespace detail

inline int worker_count() {
    int w = detail::worker_count_slot().load(std::memory_order_relaxed);
    if (w <= 0) {
        unsigned hc = std::thread::hardware_concurrency();
        w = hc == 0 ? 1 : static_cast<int>(hc);
    }
    return w;
}

inline void set_worker_count(int w) {
    detail::worker_count_slot().store(w, std::memory_order_relaxed);
}

namespace detail {

/// Number of reduction chunks for a range of length n: a fixed multiple of
/// the worker count, capped by the range length.
inline int64_t chunk_count(int64_t n, int workers) {
    if (n <= 0) return 0;
    return std::min<int64_t>(n, static_cast<int64_t>(workers) * 8);
}

/// Runs body(chunk_id) for chunk_id in [0, chunks) on the worker pool.
template <class Body>
void run_chunks(int64_t chunks, int workers, Body&& body) {
    if (chunks <= 0) return;
    if (workers <= 1 || chunks == 1) {
        for (int64_t c = 0; c < chunks; ++c) body(c);
        return;
    }
    std::atomic<int64_t> next{0};
    auto worker = [&]() {
        for (;;) {
            int64_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= chunks) break;
            body(c);
        }
    };
    std::vector<std::thread> threads;
    int nthreads = static_cast<int>(std::min<int64_t>(workers, chunks));
    threads.reserve(static_cast<std::size_t>(nthreads) - 1);
    for (int t = 1; t < nthreads; ++t) threads.emplace_back(worker);
    worker();
    for (auto& th : threads) th.join();
}

inline std::pair<int64_t, int64_t> chunk_range(int64_t n, int64_t chunks, int64_t c) {
    const int64_t lo = n * c / chunks;
    const int64_t hi = n * (c + 1) / chunks;
    return {lo, hi};
}

}  // namespace detail

/// Applies f(i) for i in [0, n), in parallel over disjoint chunks.
template <class F>
void parallel_for(int64_t n, F&& f) {
    const int workers = worker_count();
    const int64_t chunks = detail::chunk_count(n, workers);
    detail::run_chunks(chunks, workers, [&](int64_t c) {
        auto [lo, hi] = detail::chunk_range(n, chunks, c);
        for (int64_t i = lo; i < hi; ++i) f(i);
    });
}

/// Applies f(lo, hi) for the chunk subranges of [0, n); useful when the body
/// wants to amortize per-chunk setup.
template <class F>
void parallel_for_chunks(int64_t n, F&& f) {
    const int workers = worker_count();
    const int64_t chunks = detail::chunk_count(n, workers);
    detail::run_chunks(chunks, workers, [&](int64_t c) {
        auto [lo, hi] = detail::chunk_range(n, chunks, c);
        f(lo, hi);
    });
}

/// Deterministic sum of f(i) over [0, n): per-chunk partial sums in index
/// order, combined sequentially in chunk order.
template <class F>
double parallel_sum(int64_t n, F&& f) {
    const int workers = worker_count();
    const int64_t chunks = detail::chunk_count(n, workers);
    if (chunks == 0) return 0.0;
    std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
    detail::run_chunks(chunks, workers, [&](int64_t c) {
        auto [lo, hi] = detail::chunk_range(n, chunks, c);
        double s = 0.0;
        for (int64_t i = lo; i < hi; ++i) s += f(i);
        partial[static_cast<std::size_t>(c)] = s;
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

/// Deterministic max of f(i) over [0, n) (max is order-independent, but the
/// chunked evaluation keeps the traversal pattern uniform with parallel_sum).
template <class F>
double parallel_max(int64_t n, F&& f, double init) {
    const int workers = worker_count();
    const int64_t chunks = detail::chunk_count(n, workers);
    if (chunks == 0) return init;
    std::vector<double> partial(static_cast<std::size_t>(chunks), init);
    detail::run_chunks(chunks, workers, [&](int64_t c) {
        auto [lo, hi] = detail::chunk_range(n, chunks, c);
        double mx = init;
        for (int64_t i = lo; i < hi; ++i) mx = std::max(mx, f(i));
        partial[static_cast<std::size_t>(c)] = mx;
    });
    double total = init;
    for (double mxv : partial) total = std::max(total, mxv);
    return total;
}

}  // namespace grushin
