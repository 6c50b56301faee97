#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace voice::agents {

/// Source of session timestamps, in whole Unix seconds.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_s() const = 0;
};

class SystemClock final : public Clock {
public:
    std::int64_t now_s() const override {
        return std::chrono::duration_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }
};

/// A clock that only moves when told to. Used for replay and simulation.
class ManualClock final : public Clock {
public:
    explicit ManualClock(std::int64_t start_s = 0) : now_(start_s) {}

    std::int64_t now_s() const override { return now_.load(); }
    void set(std::int64_t s) { now_.store(s); }
    void advance(std::int64_t seconds) { now_.fetch_add(seconds); }

private:
    std::atomic<std::int64_t> now_;
};

}  // namespace voice::agents
