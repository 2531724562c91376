#include <nsqstab/parallel.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nsqstab {

unsigned worker_count()
{
    const char* env = std::getenv("NSQSTAB_THREADS");
    if (env == nullptr) return 1;
    const long n = std::strtol(env, nullptr, 10);
    if (n <= 0) return std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<long>(n, 256));
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn)
{
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(worker_count(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace nsqstab
