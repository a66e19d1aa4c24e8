#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace meghasim {

// Virtual time in integer nanoseconds. Integer ticks keep hop arithmetic
// exact, so 3 x 0.5 ms is exactly 1.5 ms rather than a rounded double.
class SimTime {
 public:
  static constexpr std::int64_t kTicksPerSecond = 1'000'000'000;

  constexpr SimTime() = default;

  static constexpr SimTime ticks(std::int64_t t) { return SimTime(t); }
  static SimTime seconds(double s) {
    return SimTime(static_cast<std::int64_t>(std::llround(s * kTicksPerSecond)));
  }
  static constexpr SimTime max() { return SimTime(INT64_MAX); }

  constexpr std::int64_t count() const { return ticks_; }
  constexpr double to_seconds() const {
    return static_cast<double>(ticks_) / static_cast<double>(kTicksPerSecond);
  }

  constexpr SimTime& operator+=(SimTime o) {
    ticks_ += o.ticks_;
    return *this;
  }
  constexpr SimTime& operator-=(SimTime o) {
    ticks_ -= o.ticks_;
    return *this;
  }
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime(a.ticks_ + b.ticks_); }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime(a.ticks_ - b.ticks_); }
  friend constexpr SimTime operator*(std::int64_t k, SimTime a) { return SimTime(k * a.ticks_); }
  friend constexpr SimTime operator*(SimTime a, std::int64_t k) { return SimTime(k * a.ticks_); }
  friend constexpr auto operator<=>(SimTime, SimTime) = default;

 private:
  constexpr explicit SimTime(std::int64_t t) : ticks_(t) {}
  std::int64_t ticks_ = 0;
};

// Exact decimal rendering, e.g. "1.001500000".
std::string format_seconds(SimTime t);

}  // namespace meghasim
