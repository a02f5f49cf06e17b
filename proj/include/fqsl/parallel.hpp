#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fqsl {

/// Worker cap for every parallel loop in the library. Defaults to the
/// FQSL_THREADS environment variable, else the hardware concurrency.
int thread_count();
void set_thread_count(int n);

/// Runs fn(chunk) for chunk in [0, chunks) on up to thread_count() workers.
/// Chunks are claimed dynamically; callers write results into per-chunk slots
/// and merge them in chunk order, so results do not depend on the thread count.
void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& fn);

/// Splits [0, n) into fixed-size chunks (independent of thread count), maps each
/// chunk to a T and returns the per-chunk results in order.
template <class T, class F>
std::vector<T> map_chunks(std::size_t n, std::size_t chunk_size, F&& fn) {
    chunk_size = std::max<std::size_t>(chunk_size, 1);
    const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
    std::vector<T> out(chunks);
    parallel_chunks(chunks, [&](std::size_t c) {
        const std::size_t lo = c * chunk_size;
        const std::size_t hi = std::min(n, lo + chunk_size);
        out[c] = fn(lo, hi);
    });
    return out;
}

}  // namespace fqsl
