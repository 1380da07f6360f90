// parallel.hpp - fork-join helpers, work pool and spinlock built on std::thread
#ifndef HYPERPART_PARALLEL_PARALLEL_HPP
#define HYPERPART_PARALLEL_PARALLEL_HPP

#include <atomic>
#include <condition_variable>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace hyperpart {

// Test-and-set spinlock. Spins yield because the sandbox may run many
// logical workers on few cores; the holder must get scheduled to release.
class SpinLock {
public:
    void lock() {
        int spins = 0;
        while (flag_.test_and_set(std::memory_order_acquire)) {
            if (++spins >= 16) {
                std::this_thread::yield();
                spins = 0;
            }
        }
    }
    void unlock() { flag_.clear(std::memory_order_release); }

private:
    std::atomic_flag flag_ = ATOMIC_FLAG_INIT;
};

namespace par {

// Runs worker(0..threads-1), worker(0) on the calling thread. Rethrows the
// first exception any worker raised.
inline void run(int threads, const std::function<void(int)>& worker) {
    if (threads <= 1) {
        worker(0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    std::mutex err_mutex;
    std::exception_ptr err;
    auto guarded = [&](int id) {
        try {
            worker(id);
        } catch (...) {
            std::lock_guard<std::mutex> g(err_mutex);
            if (!err) err = std::current_exception();
        }
    };
    for (int t = 1; t < threads; ++t) pool.emplace_back(guarded, t);
    guarded(0);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

// Dynamic chunked parallel map over [0, n). f must only write state owned by
// index i, so results do not depend on the thread that ran a chunk.
template <typename F>
void for_each(int threads, std::size_t n, F&& f, std::size_t grain = 64) {
    if (threads <= 1 || n <= grain) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    run(threads, [&](int) {
        while (true) {
            const std::size_t begin = next.fetch_add(grain, std::memory_order_relaxed);
            if (begin >= n) break;
            const std::size_t end = std::min(begin + grain, n);
            for (std::size_t i = begin; i < end; ++i) f(i);
        }
    });
}

}  // namespace par

// Small work pool used for task parallelism in the initial partitioner
// (recursive bipartition sides, portfolio members). Waiters help execute
// queued tasks, so nested waits cannot deadlock.
class ThreadPool {
public:
    explicit ThreadPool(int workers) {
        for (int i = 0; i < workers; ++i) {
            threads_.emplace_back([this] { worker_loop(); });
        }
    }

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> g(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    int worker_count() const { return static_cast<int>(threads_.size()); }

    struct Task {
        std::atomic<int> state{0};  // 0 = pending, 1 = claimed, 2 = done
        std::function<void()> fn;
        std::exception_ptr error;

        bool claim() {
            int expected = 0;
            return state.compare_exchange_strong(expected, 1);
        }
        void execute() {
            try {
                fn();
            } catch (...) {
                error = std::current_exception();
            }
            state.store(2, std::memory_order_release);
        }
        bool done() const { return state.load(std::memory_order_acquire) == 2; }
    };

    std::shared_ptr<Task> submit(std::function<void()> fn) {
        auto task = std::make_shared<Task>();
        task->fn = std::move(fn);
        if (threads_.empty()) {
            // No workers: run at submit time; keeps single-thread runs in
            // submission order.
            if (task->claim()) task->execute();
            return task;
        }
        {
            std::lock_guard<std::mutex> g(mutex_);
            queue_.push_back(task);
        }
        cv_.notify_one();
        return task;
    }

    // Pops one pending task and runs it on the calling thread.
    bool try_run_one() {
        std::shared_ptr<Task> task;
        {
            std::lock_guard<std::mutex> g(mutex_);
            while (!queue_.empty()) {
                task = queue_.front();
                queue_.pop_front();
                if (task->claim()) break;
                task.reset();
            }
        }
        if (!task) return false;
        task->execute();
        return true;
    }

    // Blocks until the task finished, executing other work meanwhile.
    void wait(const std::shared_ptr<Task>& task) {
        if (task->claim()) task->execute();
        while (!task->done()) {
            if (!try_run_one()) std::this_thread::yield();
        }
        if (task->error) std::rethrow_exception(task->error);
    }

private:
    void worker_loop() {
        while (true) {
            std::shared_ptr<Task> task;
            {
                std::unique_lock<std::mutex> g(mutex_);
                cv_.wait(g, [this] { return stop_ || !queue_.empty(); });
                if (stop_ && queue_.empty()) return;
                task = queue_.front();
                queue_.pop_front();
            }
            if (task->claim()) task->execute();
        }
    }

    std::deque<std::shared_ptr<Task>> queue_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::vector<std::thread> threads_;
    bool stop_ = false;
};

// Runs a and b, b possibly on a pool worker; returns after both finished.
template <typename FA, typename FB>
void parallel_invoke(ThreadPool* pool, FA&& a, FB&& b) {
    if (pool == nullptr || pool->worker_count() == 0) {
        a();
        b();
        return;
    }
    auto task = pool->submit(std::forward<FB>(b));
    a();
    pool->wait(task);
}

}  // namespace hyperpart

#endif
