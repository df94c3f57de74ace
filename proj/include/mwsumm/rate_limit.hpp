#pragma once

#include <algorithm>
#include <chrono>
#include <mutex>
#include <thread>

namespace mwsumm {

// Token bucket shared by all fetch workers. acquire() blocks until a token
// is available; refill is continuous at `rate` tokens per second.
class TokenBucket {
  public:
    explicit TokenBucket(double rate_per_second, double burst = 1.0)
        : rate_(rate_per_second),
          capacity_(std::max(burst, 1.0)),
          tokens_(capacity_),
          last_(Clock::now()) {}

    void acquire() {
        std::unique_lock<std::mutex> lock(mutex_);
        while (true) {
            refill();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            const double deficit = 1.0 - tokens_;
            auto wait = std::chrono::duration<double>(deficit / rate_);
            lock.unlock();
            std::this_thread::sleep_for(wait);
            lock.lock();
        }
    }

    double rate() const { return rate_; }

  private:
    using Clock = std::chrono::steady_clock;

    void refill() {
        auto now = Clock::now();
        std::chrono::duration<double> elapsed = now - last_;
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed.count() * rate_);
    }

    double rate_;
    double capacity_;
    double tokens_;
    Clock::time_point last_;
    std::mutex mutex_;
};

}  // namespace mwsumm
