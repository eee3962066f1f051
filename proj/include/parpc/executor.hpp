#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace parpc {

/// Half-open index range handed to one worker.
struct Slice {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Split [0, count) into `parts` contiguous slices whose sizes differ by at most one.
inline std::vector<Slice> even_slices(std::size_t count, std::size_t parts) {
    parts = std::max<std::size_t>(1, std::min(parts, count));
    std::vector<Slice> out(parts);
    std::size_t base = count / parts, extra = count % parts, at = 0;
    for (std::size_t k = 0; k < parts; ++k) {
        std::size_t len = base + (k < extra ? 1 : 0);
        out[k] = {at, at + len};
        at += len;
    }
    return out;
}

/// Fork-join pool with a fixed set of workers. `run` blocks until every slice
/// has finished (the join is the barrier). The calling thread executes slice 0.
///
/// Not safe to call `run` concurrently on one pool; separate pools are independent.
class ForkJoinPool {
public:
    explicit ForkJoinPool(std::size_t num_workers) : size_(std::max<std::size_t>(1, num_workers)) {
        threads_.reserve(size_ - 1);
        for (std::size_t w = 1; w < size_; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
    }

    ForkJoinPool(const ForkJoinPool&) = delete;
    ForkJoinPool& operator=(const ForkJoinPool&) = delete;

    ~ForkJoinPool() {
        {
            std::lock_guard lock(mutex_);
            stopping_ = true;
            ++generation_;
        }
        wake_.notify_all();
        for (auto& t : threads_) t.join();
    }

    std::size_t size() const noexcept { return size_; }

    /// Runs fn(slice) over an even contiguous partition of [0, count).
    /// The first exception (by slice index) is rethrown after all slices finish.
    void run(std::size_t count, const std::function<void(Slice)>& fn) {
        if (count == 0) return;
        auto slices = even_slices(count, size_);
        std::vector<std::exception_ptr> errors(slices.size());
        if (slices.size() == 1) {
            invoke(fn, slices[0], errors[0]);
        } else {
            {
                std::lock_guard lock(mutex_);
                job_ = &fn;
                slices_ = &slices;
                errors_ = &errors;
                pending_ = slices.size() - 1;
                ++generation_;
            }
            wake_.notify_all();
            invoke(fn, slices[0], errors[0]);
            std::unique_lock lock(mutex_);
            done_.wait(lock, [this] { return pending_ == 0; });
            job_ = nullptr;
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

private:
    static void invoke(const std::function<void(Slice)>& fn, Slice s, std::exception_ptr& err) {
        try {
            fn(s);
        } catch (...) {
            err = std::current_exception();
        }
    }

    void worker_loop(std::size_t index) {
        std::size_t seen = 0;
        while (true) {
            const std::function<void(Slice)>* job;
            Slice slice;
            std::exception_ptr* err;
            {
                std::unique_lock lock(mutex_);
                wake_.wait(lock, [&] { return generation_ != seen; });
                seen = generation_;
                if (stopping_) return;
                if (!job_ || index >= slices_->size()) continue;
                job = job_;
                slice = (*slices_)[index];
                err = &(*errors_)[index];
            }
            invoke(*job, slice, *err);
            {
                std::lock_guard lock(mutex_);
                if (--pending_ == 0) done_.notify_one();
            }
        }
    }

    std::size_t size_;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable wake_, done_;
    std::size_t generation_ = 0;
    bool stopping_ = false;
    const std::function<void(Slice)>* job_ = nullptr;
    const std::vector<Slice>* slices_ = nullptr;
    std::vector<std::exception_ptr>* errors_ = nullptr;
    std::size_t pending_ = 0;
};

}  // namespace parpc
