#include "binlat/dates.hpp"

#include <cstdio>

#include "binlat/errors.hpp"

namespace binlat {

namespace {

bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

int days_in_month(int y, int m) {
  static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[m - 1];
}

}  // namespace

bool is_valid_date(const Date& d) {
  return d.m >= 1 && d.m <= 12 && d.d >= 1 && d.d <= days_in_month(d.y, d.m);
}

Date parse_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw ValidationError("bad date '" + s + "': expected YYYY-MM-DD");
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9')
      throw ValidationError("bad date '" + s + "': expected YYYY-MM-DD");
  Date d;
  d.y = std::stoi(s.substr(0, 4));
  d.m = std::stoi(s.substr(5, 2));
  d.d = std::stoi(s.substr(8, 2));
  if (!is_valid_date(d)) throw ValidationError("bad date '" + s + "': not a calendar date");
  return d;
}

std::string to_string(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.y, d.m, d.d);
  return buf;
}

std::int64_t days_from_civil(const Date& dt) {
  // chrono-compatible civil-days arithmetic, era = 400-year block
  std::int64_t y = dt.y;
  const unsigned m = static_cast<unsigned>(dt.m);
  const unsigned d = static_cast<unsigned>(dt.d);
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int weekday(const Date& d) {
  // 1970-01-01 was a Thursday (weekday 3 with Monday = 0).
  std::int64_t z = days_from_civil(d) + 3;
  return static_cast<int>(((z % 7) + 7) % 7);
}

std::int64_t week_index(const Date& d) {
  std::int64_t z = days_from_civil(d) + 3;  // shift so Mondays start a block of 7
  return (z >= 0 ? z : z - 6) / 7;
}

}  // namespace binlat
