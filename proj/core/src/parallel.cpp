#include "mlsm/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mlsm {
namespace {

std::atomic<std::size_t>& thread_setting() {
    static std::atomic<std::size_t> n{std::max<std::size_t>(1, std::thread::hardware_concurrency())};
    return n;
}

}  // namespace

std::size_t worker_threads() noexcept { return thread_setting().load(); }

void set_worker_threads(std::size_t n) noexcept { thread_setting().store(std::max<std::size_t>(1, n)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_block) {
    if (n == 0) return;
    const std::size_t max_blocks = std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_block));
    const std::size_t blocks = std::min(worker_threads(), max_blocks);
    if (blocks <= 1) {
        body(0, n);
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(blocks);
    const std::size_t chunk = n / blocks;
    const std::size_t extra = n % blocks;
    std::size_t begin = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t end = begin + chunk + (b < extra ? 1 : 0);
        pool.emplace_back([&, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mlsm
