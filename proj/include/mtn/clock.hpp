#pragma once

#include <atomic>
#include <cstdint>

namespace mtn {

// Millisecond time source. Components never read wall time directly, so a
// run can be driven by a controlled clock and freshness bounds become
// exactly assertable.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() const = 0;
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() const override;
};

// Manually advanced clock. Readable from any thread.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(std::int64_t start_ms = 0) : now_(start_ms) {}

  std::int64_t now_ms() const override { return now_.load(std::memory_order_acquire); }
  void set_ms(std::int64_t t) { now_.store(t, std::memory_order_release); }
  void advance_ms(std::int64_t d) { now_.fetch_add(d, std::memory_order_acq_rel); }

 private:
  std::atomic<std::int64_t> now_;
};

}  // namespace mtn
