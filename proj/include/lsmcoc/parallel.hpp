#pragma once
// Index-space parallel loop with deterministic work. Each index must be
// processed independently of every other (own RNG substream, own output slot),
// which makes results bit-identical for any thread count, including 1.

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace lsmcoc {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// make_scratch() builds one per-worker workspace; fn(i, scratch) may reuse it
// freely between indices. Contiguous static partition, no work stealing.
template <class MakeScratch, class Fn>
void parallel_for(std::size_t count, int threads, MakeScratch&& make_scratch, Fn&& fn) {
    int nt = resolve_threads(threads);
    if (count == 0) return;
    if (static_cast<std::size_t>(nt) > count) nt = static_cast<int>(count);
    if (nt <= 1) {
        auto scratch = make_scratch();
        for (std::size_t i = 0; i < count; ++i) fn(i, scratch);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nt));
    std::exception_ptr err;
    std::mutex err_mu;
    for (int w = 0; w < nt; ++w) {
        pool.emplace_back([&, w] {
            try {
                auto scratch = make_scratch();
                std::size_t lo = count * static_cast<std::size_t>(w) / static_cast<std::size_t>(nt);
                std::size_t hi = count * static_cast<std::size_t>(w + 1) / static_cast<std::size_t>(nt);
                for (std::size_t i = lo; i < hi; ++i) fn(i, scratch);
            } catch (...) {
                std::lock_guard<std::mutex> g(err_mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace lsmcoc
