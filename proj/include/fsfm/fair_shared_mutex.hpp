#pragma once

#include <condition_variable>
#include <cstdint>
#include <mutex>

namespace fsfm {

/// Reader/writer lock where writers are admitted strictly in arrival order and
/// new readers queue behind any waiting writer. Meets SharedMutex, so it works
/// with std::unique_lock and std::shared_lock.
class FairSharedMutex {
public:
    void lock() {
        std::unique_lock lk(mu_);
        const std::uint64_t ticket = next_ticket_++;
        cv_.wait(lk, [&] { return serving_ == ticket && !writer_ && readers_ == 0; });
        writer_ = true;
    }

    void unlock() {
        {
            std::lock_guard lk(mu_);
            writer_ = false;
            ++serving_;
        }
        cv_.notify_all();
    }

    void lock_shared() {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return !writer_ && serving_ == next_ticket_; });
        ++readers_;
    }

    void unlock_shared() {
        bool last = false;
        {
            std::lock_guard lk(mu_);
            last = --readers_ == 0;
        }
        if (last) cv_.notify_all();
    }

    bool try_lock() {
        std::lock_guard lk(mu_);
        if (writer_ || readers_ != 0 || serving_ != next_ticket_) return false;
        ++next_ticket_;
        writer_ = true;
        return true;
    }

    bool try_lock_shared() {
        std::lock_guard lk(mu_);
        if (writer_ || serving_ != next_ticket_) return false;
        ++readers_;
        return true;
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::uint64_t next_ticket_ = 0;
    std::uint64_t serving_ = 0;
    std::uint64_t readers_ = 0;
    bool writer_ = false;
};

}  // namespace fsfm
