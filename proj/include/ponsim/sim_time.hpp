#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ponsim {

/// Raised when time arithmetic would wrap. Always a programming error.
class TimeArithmeticError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Simulation time and durations, counted in integer picoseconds.
///
/// Every quantity the model uses divides a picosecond grid exactly: one bit
/// at 10 Gb/s is 100 ticks, the GPON guard is 30 000 ticks. Arithmetic is
/// checked; subtracting a later instant from an earlier one throws instead
/// of wrapping.
class SimTime {
 public:
  using rep = std::uint64_t;

  static constexpr rep kTicksPerNs = 1'000;
  static constexpr rep kTicksPerUs = 1'000'000;
  static constexpr rep kTicksPerMs = 1'000'000'000;
  static constexpr rep kTicksPerSecond = 1'000'000'000'000;

  constexpr SimTime() noexcept = default;

  static constexpr SimTime ticks(rep t) noexcept { return SimTime(t); }
  static constexpr SimTime ps(rep t) noexcept { return SimTime(t); }
  static constexpr SimTime ns(rep t) { return SimTime(checked_mul(t, kTicksPerNs)); }
  static constexpr SimTime us(rep t) { return SimTime(checked_mul(t, kTicksPerUs)); }
  static constexpr SimTime ms(rep t) { return SimTime(checked_mul(t, kTicksPerMs)); }
  static constexpr SimTime s(rep t) { return SimTime(checked_mul(t, kTicksPerSecond)); }
  static constexpr SimTime zero() noexcept { return SimTime(0); }
  static constexpr SimTime max() noexcept {
    return SimTime(std::numeric_limits<rep>::max());
  }

  /// Nearest tick to a duration given in seconds. Rejects negatives and NaN.
  static SimTime from_seconds(double seconds);

  constexpr rep count() const noexcept { return ticks_; }
  constexpr double seconds() const noexcept {
    return static_cast<double>(ticks_) / static_cast<double>(kTicksPerSecond);
  }
  constexpr double microseconds() const noexcept {
    return static_cast<double>(ticks_) / static_cast<double>(kTicksPerUs);
  }
  constexpr std::int64_t signed_count() const {
    if (ticks_ > static_cast<rep>(std::numeric_limits<std::int64_t>::max()))
      throw TimeArithmeticError("SimTime does not fit a signed tick count");
    return static_cast<std::int64_t>(ticks_);
  }

  constexpr auto operator<=>(const SimTime&) const noexcept = default;

  constexpr SimTime& operator+=(SimTime other) {
    if (ticks_ > std::numeric_limits<rep>::max() - other.ticks_)
      throw TimeArithmeticError("SimTime addition overflow");
    ticks_ += other.ticks_;
    return *this;
  }
  constexpr SimTime& operator-=(SimTime other) {
    if (other.ticks_ > ticks_)
      throw TimeArithmeticError("SimTime subtraction underflow");
    ticks_ -= other.ticks_;
    return *this;
  }
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return a += b; }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return a -= b; }
  friend constexpr SimTime operator*(SimTime a, rep k) {
    return SimTime(checked_mul(a.ticks_, k));
  }
  friend constexpr SimTime operator*(rep k, SimTime a) { return a * k; }
  /// Integer division, rounded toward zero.
  friend constexpr SimTime operator/(SimTime a, rep k) {
    if (k == 0) throw TimeArithmeticError("SimTime division by zero");
    return SimTime(a.ticks_ / k);
  }
  friend constexpr rep operator/(SimTime a, SimTime b) {
    if (b.ticks_ == 0) throw TimeArithmeticError("SimTime division by zero");
    return a.ticks_ / b.ticks_;
  }
  friend constexpr SimTime operator%(SimTime a, SimTime b) {
    if (b.ticks_ == 0) throw TimeArithmeticError("SimTime modulo by zero");
    return SimTime(a.ticks_ % b.ticks_);
  }

 private:
  constexpr explicit SimTime(rep t) noexcept : ticks_(t) {}

  static constexpr rep checked_mul(rep a, rep b) {
    if (a != 0 && b > std::numeric_limits<rep>::max() / a)
      throw TimeArithmeticError("SimTime multiplication overflow");
    return a * b;
  }

  rep ticks_ = 0;
};

/// Signed difference a - b in ticks, for formulas that may go negative.
constexpr std::int64_t signed_diff(SimTime a, SimTime b) {
  return a.signed_count() - b.signed_count();
}

/// Parses "62.5us", "4ms", "1000ps", "0.5s". A bare number is taken in
/// picoseconds. Values must land on a whole tick.
SimTime parse_duration(std::string_view text);

/// Short human form such as "31.25us"; exact in ticks.
std::string to_string(SimTime t);

namespace literals {
constexpr SimTime operator""_ps(unsigned long long v) { return SimTime::ps(v); }
constexpr SimTime operator""_ns(unsigned long long v) { return SimTime::ns(v); }
constexpr SimTime operator""_us(unsigned long long v) { return SimTime::us(v); }
constexpr SimTime operator""_ms(unsigned long long v) { return SimTime::ms(v); }
constexpr SimTime operator""_s(unsigned long long v) { return SimTime::s(v); }
}  // namespace literals

}  // namespace ponsim
