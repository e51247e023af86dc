#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <string>

#include "snmc/errors.hpp"

namespace snmc {

// Monotonic evaluation counter with a hard capacity. Every model evaluation
// charges exactly one unit; overspending throws before the counter moves past
// the capacity, so `spent() <= capacity()` holds at all times, including under
// concurrent charging.
class BudgetLedger {
public:
    explicit BudgetLedger(std::int64_t capacity) : capacity_(capacity) {
        if (capacity < 0) throw ValidationError("budget capacity must be >= 0");
    }

    static BudgetLedger unlimited() {
        return BudgetLedger(std::numeric_limits<std::int64_t>::max());
    }

    BudgetLedger(const BudgetLedger&) = delete;
    BudgetLedger& operator=(const BudgetLedger&) = delete;

    void charge(std::int64_t count) {
        if (count < 0) throw ValidationError("charge count must be >= 0");
        std::int64_t cur = spent_.load(std::memory_order_relaxed);
        for (;;) {
            if (count > capacity_ - cur) {
                throw BudgetExceeded("budget exceeded: spent " + std::to_string(cur) +
                                     " + " + std::to_string(count) + " > capacity " +
                                     std::to_string(capacity_));
            }
            if (spent_.compare_exchange_weak(cur, cur + count, std::memory_order_relaxed)) {
                return;
            }
        }
    }

    std::int64_t spent() const { return spent_.load(std::memory_order_relaxed); }
    std::int64_t capacity() const { return capacity_; }

private:
    std::int64_t capacity_;
    std::atomic<std::int64_t> spent_{0};
};

} // namespace snmc
