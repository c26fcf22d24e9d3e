#include "dgmm/time_value.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "dgmm/error.hpp"

namespace dgmm {
namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

[[noreturn]] void bad_time(std::string_view text, std::string_view why) {
  throw Error(ErrorKind::invalid_time,
              "invalid time '" + std::string(text) + "': " + std::string(why));
}

int read_fixed(std::string_view text, std::size_t pos, std::size_t width,
               std::string_view whole) {
  if (pos + width > text.size()) bad_time(whole, "truncated");
  int value = 0;
  auto first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + width, value);
  if (ec != std::errc{} || ptr != first + width) bad_time(whole, "expected digits");
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c,
                 std::string_view whole) {
  if (pos >= text.size() || text[pos] != c) {
    bad_time(whole, std::string("expected '") + c + "'");
  }
}

}  // namespace

std::int64_t parse_instant(std::string_view text) {
  using namespace std::chrono;
  // YYYY-MM-DD
  int y = read_fixed(text, 0, 4, text);
  expect_char(text, 4, '-', text);
  int mo = read_fixed(text, 5, 2, text);
  expect_char(text, 7, '-', text);
  int d = read_fixed(text, 8, 2, text);
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) bad_time(text, "no such calendar date");
  std::int64_t seconds =
      static_cast<std::int64_t>(sys_days{ymd}.time_since_epoch().count()) *
      kSecondsPerDay;
  if (text.size() == 10) return seconds;

  // THH:MM:SSZ
  if (text.size() != 20) bad_time(text, "expected YYYY-MM-DD or YYYY-MM-DDTHH:MM:SSZ");
  expect_char(text, 10, 'T', text);
  int hh = read_fixed(text, 11, 2, text);
  expect_char(text, 13, ':', text);
  int mm = read_fixed(text, 14, 2, text);
  expect_char(text, 16, ':', text);
  int ss = read_fixed(text, 17, 2, text);
  expect_char(text, 19, 'Z', text);
  if (hh > 23 || mm > 59 || ss > 59) bad_time(text, "clock field out of range");
  return seconds + hh * 3600 + mm * 60 + ss;
}

std::string format_instant(std::int64_t seconds) {
  using namespace std::chrono;
  std::int64_t days = seconds / kSecondsPerDay;
  std::int64_t rem = seconds % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --days;
  }
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  if (rem == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                  static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
  }
  return buf;
}

TimeValue TimeValue::interval(std::int64_t start, std::int64_t end) {
  if (start > end) {
    throw Error(ErrorKind::invalid_time,
                "invalid time interval: start " + format_instant(start) +
                    " is after end " + format_instant(end));
  }
  return {start, end};
}

TimeValue TimeValue::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return instant(parse_instant(text));
  return interval(parse_instant(text.substr(0, slash)),
                  parse_instant(text.substr(slash + 1)));
}

std::string TimeValue::canonical() const {
  if (is_instant()) return format_instant(start_);
  return format_instant(start_) + "/" + format_instant(end_);
}

}  // namespace dgmm
