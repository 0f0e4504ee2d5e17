#include "spectral/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace spectral::detail {

namespace {

std::size_t worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : std::min<std::size_t>(hw, 8);
}

// Persistent pool; the calling thread participates, so the pool holds
// worker_count() - 1 threads. Work items are claimed via a shared atomic
// counter and must write to disjoint locations.
class Pool {
public:
    Pool() : extra_(worker_count() > 1 ? worker_count() - 1 : 0) {
        threads_.reserve(extra_);
        for (std::size_t t = 0; t < extra_; ++t)
            threads_.emplace_back([this] { worker_loop(); });
    }

    ~Pool() {
        {
            std::lock_guard lock(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& th : threads_) th.join();
    }

    void run(std::size_t count, const std::function<void(std::size_t)>& fn) {
        if (extra_ == 0 || count < 2) {
            for (std::size_t i = 0; i < count; ++i) fn(i);
            return;
        }
        // one top-level parallel section at a time; concurrent callers queue
        std::lock_guard run_lock(run_mu_);
        {
            std::lock_guard lock(mu_);
            fn_ = &fn;
            next_.store(0, std::memory_order_relaxed);
            count_ = count;
            pending_ = extra_;
            ++generation_;
        }
        cv_.notify_all();
        drain();
        std::unique_lock lock(mu_);
        done_cv_.wait(lock, [this] { return pending_ == 0; });
        fn_ = nullptr;
    }

private:
    void drain() {
        const auto& fn = *fn_;
        for (std::size_t i = next_.fetch_add(1); i < count_; i = next_.fetch_add(1)) fn(i);
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock lock(mu_);
                cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
            }
            drain();
            {
                std::lock_guard lock(mu_);
                if (--pending_ == 0) done_cv_.notify_one();
            }
        }
    }

    std::size_t extra_;
    std::vector<std::thread> threads_;
    std::mutex run_mu_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(std::size_t)>* fn_ = nullptr;
    std::atomic<std::size_t> next_{0};
    std::size_t count_ = 0;
    std::size_t pending_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

Pool& pool() {
    static Pool instance;
    return instance;
}

thread_local bool inside_parallel = false;

}  // namespace

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    // no nesting: inner parallel sections run serially on their worker
    if (inside_parallel) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    inside_parallel = true;
    auto wrapped = [&](std::size_t i) {
        inside_parallel = true;
        fn(i);
    };
    pool().run(count, wrapped);
    inside_parallel = false;
}

void parallel_chunks(std::size_t count, std::size_t chunks,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    chunks = std::max<std::size_t>(1, std::min(chunks, count));
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t begin = count * c / chunks;
        const std::size_t end = count * (c + 1) / chunks;
        fn(c, begin, end);
    });
}

}  // namespace spectral::detail
