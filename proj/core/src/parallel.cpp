#include "mlfe/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mlfe {

int default_threads() {
    if (const char* env = std::getenv("MLFE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int begin, int end, int threads, const std::function<void(int)>& body) {
    const int count = end - begin;
    if (count <= 0) return;
    const int workers = std::clamp(threads, 1, count);
    if (workers == 1) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_lock;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            const int lo = begin + static_cast<int>(static_cast<long long>(count) * w / workers);
            const int hi = begin + static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
            pool.emplace_back([&, lo, hi] {
                try {
                    for (int i = lo; i < hi; ++i) body(i);
                } catch (...) {
                    std::lock_guard lock(failure_lock);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace mlfe
