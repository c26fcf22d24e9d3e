#pragma once

#include <cstdint>
#include <compare>
#include <string>
#include <string_view>

namespace dgmm {

// A time point or closed interval, in whole seconds since the Unix epoch (UTC).
// An instant is an interval with start == end, so "2000-01-01" and
// "2000-01-01/2000-01-01" are the same value and render identically.
class TimeValue {
 public:
  static TimeValue instant(std::int64_t seconds) { return {seconds, seconds}; }
  // Throws Error(invalid_time) when start > end.
  static TimeValue interval(std::int64_t start, std::int64_t end);
  // Accepts `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM:SSZ`, or `<instant>/<instant>`.
  static TimeValue parse(std::string_view text);

  std::int64_t start() const noexcept { return start_; }
  std::int64_t end() const noexcept { return end_; }
  bool is_instant() const noexcept { return start_ == end_; }

  bool covers(const TimeValue& other) const noexcept {
    return start_ <= other.start_ && other.end_ <= end_;
  }

  // Canonical rendering; the identity key of Time nodes.
  std::string canonical() const;

  friend auto operator<=>(const TimeValue&, const TimeValue&) = default;

 private:
  TimeValue(std::int64_t start, std::int64_t end) : start_(start), end_(end) {}

  std::int64_t start_;
  std::int64_t end_;
};

// Parses one ISO-8601 instant into epoch seconds.
std::int64_t parse_instant(std::string_view text);
// Date-only when the instant falls on midnight, full form otherwise.
std::string format_instant(std::int64_t seconds);

}  // namespace dgmm
