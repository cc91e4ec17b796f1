#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace binlat {

// Proleptic Gregorian calendar date. Comparison is chronological.
struct Date {
  int y = 1970;
  int m = 1;
  int d = 1;

  friend auto operator<=>(const Date&, const Date&) = default;
};

// Parses strict ISO-8601 "YYYY-MM-DD"; validates the calendar (leap years included).
Date parse_date(const std::string& s);

std::string to_string(const Date& d);

bool is_valid_date(const Date& d);

// Days since 1970-01-01 (negative before). Howard Hinnant's civil-days algorithm.
std::int64_t days_from_civil(const Date& d);

Date civil_from_days(std::int64_t z);

// 0 = Monday ... 6 = Sunday.
int weekday(const Date& d);

// Index of the Monday-anchored week containing d (consecutive integers, epoch-relative).
std::int64_t week_index(const Date& d);

}  // namespace binlat
