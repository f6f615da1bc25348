#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace hubtail {

inline constexpr std::uint64_t default_batch = 8192;

/// Worker count resolution: explicit request, then HUBTAIL_WORKERS, then
/// hardware concurrency. Worker count never influences numeric results;
/// it only schedules batches.
inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HUBTAIL_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs fn(batch_index, first_trial, last_trial) over contiguous batches
/// covering [0, trials) and returns the per-batch partials in batch order.
/// Each batch must derive its randomness from trial indices alone; the
/// caller folds the returned vector sequentially. Both together make every
/// estimate bit-identical across worker counts.
template <class Partial, class Fn>
std::vector<Partial> run_batches(std::uint64_t trials, std::uint64_t batch, int workers, Fn&& fn) {
    if (batch == 0) batch = default_batch;
    const std::uint64_t nbatches = trials == 0 ? 0 : (trials + batch - 1) / batch;
    std::vector<Partial> partials(nbatches);
    auto run_one = [&](std::uint64_t i) {
        const std::uint64_t first = i * batch;
        const std::uint64_t last = std::min(trials, first + batch);
        partials[i] = fn(i, first, last);
    };

    const int nworkers = std::min<std::uint64_t>(resolve_workers(workers), nbatches);
    if (nworkers <= 1) {
        for (std::uint64_t i = 0; i < nbatches; ++i) run_one(i);
        return partials;
    }

    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nworkers));
    for (int t = 0; t < nworkers; ++t) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= nbatches) break;
                try {
                    run_one(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return partials;
}

} // namespace hubtail
