#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <future>
#include <vector>

namespace phom {

/// Threads for sweeps: PHOM_THREADS if set, else the hardware count.
unsigned default_threads();

/// out[i] = fn(i) for i < count, on up to `threads` workers (0 = default).
/// Results are stored by index, so the output order never depends on scheduling.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, unsigned threads, Fn&& fn)
{
    if (threads == 0)
        threads = default_threads();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::vector<T> out(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++)
            out[i] = fn(i);
    };
    std::vector<std::future<void>> jobs;
    for (unsigned t = 1; t < threads; ++t)
        jobs.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& j : jobs)
        j.get();
    return out;
}

}  // namespace phom
