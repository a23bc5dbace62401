#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>

namespace bf {

// Blocking FIFO with a fixed capacity: push waits for room (backpressure),
// pop waits for an item.  close() wakes everyone; afterwards push fails and
// pop drains what is left, then returns nullopt.
template <typename T>
class BoundedQueue {
  public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

    bool push(T value) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
        if (closed_)
            return false;
        items_.push_back(std::move(value));
        not_empty_.notify_one();
        return true;
    }

    std::optional<T> pop() {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
        return take(lock);
    }

    // nullopt on timeout as well as on closed-and-empty; timed_out() tells which.
    std::optional<T> pop_for(std::chrono::steady_clock::duration timeout, bool* timed_out = nullptr) {
        std::unique_lock lock(mutex_);
        const bool ready =
            not_empty_.wait_for(lock, timeout, [&] { return closed_ || !items_.empty(); });
        if (timed_out)
            *timed_out = !ready;
        return take(lock);
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        not_empty_.notify_all();
        not_full_.notify_all();
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return items_.size();
    }
    std::size_t capacity() const { return capacity_; }

  private:
    std::optional<T> take(std::unique_lock<std::mutex>&) {
        if (items_.empty())
            return std::nullopt;
        T value = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return value;
    }

    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::condition_variable not_empty_, not_full_;
    std::deque<T> items_;
    bool closed_ = false;
};

// The one place data may be lost: offer() never blocks and rejects the new
// item when the buffer is full, counting it.  Accepted items keep their order.
template <typename T>
class BestEffortBuffer {
  public:
    explicit BestEffortBuffer(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

    bool offer(T value) {
        std::lock_guard lock(mutex_);
        if (closed_ || items_.size() >= capacity_) {
            ++dropped_;
            return false;
        }
        items_.push_back(std::move(value));
        ++accepted_;
        not_empty_.notify_one();
        return true;
    }

    std::optional<T> pop() {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
        if (items_.empty())
            return std::nullopt;
        T value = std::move(items_.front());
        items_.pop_front();
        return value;
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        not_empty_.notify_all();
    }

    std::uint64_t dropped() const {
        std::lock_guard lock(mutex_);
        return dropped_;
    }
    std::uint64_t accepted() const {
        std::lock_guard lock(mutex_);
        return accepted_;
    }
    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return items_.size();
    }
    std::size_t capacity() const { return capacity_; }

  private:
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::condition_variable not_empty_;
    std::deque<T> items_;
    std::uint64_t dropped_ = 0;
    std::uint64_t accepted_ = 0;
    bool closed_ = false;
};

} // namespace bf
