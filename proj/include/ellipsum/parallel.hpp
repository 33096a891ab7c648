#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ellipsum {

unsigned default_workers();

// Runs body(block, worker) for every block in [0, nblocks). Blocks are dealt
// round-robin, so the block -> worker map depends on the worker count but
// the block contents never do. Callers merge per-block results in order.
template <class Body>
void for_blocks(std::size_t nblocks, unsigned workers, Body&& body) {
    if (workers <= 1 || nblocks <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b) body(b, 0u);
        return;
    }
    if (workers > nblocks) workers = static_cast<unsigned>(nblocks);
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t b = w; b < nblocks; b += workers) body(b, w);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

inline unsigned default_workers() {
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1u : h;
}

} // namespace ellipsum
