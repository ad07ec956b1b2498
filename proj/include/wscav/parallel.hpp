#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace wscav {

template <class T>
struct CellResult {
    std::optional<T> value;
    std::string error;  // empty on success
};

/// Evaluates fn(i) for i in [0, n) on `threads` workers. Workers pull indices
/// from a shared counter; results land in slot i, so the output order never
/// depends on completion order. Exceptions are captured per cell.
template <class T>
std::vector<CellResult<T>> parallel_map(std::size_t n, unsigned threads,
                                        const std::function<T(std::size_t)>& fn) {
    std::vector<CellResult<T>> out(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i].value.emplace(fn(i));
            } catch (const std::exception& e) {
                out[i].error = e.what();
            } catch (...) {
                out[i].error = "unknown error";
            }
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        worker();
        return out;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace wscav
