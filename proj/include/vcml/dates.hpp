#pragma once

#include <compare>
#include <string>

namespace vcml {

// Calendar date with whole-month arithmetic. Month differences ignore the
// day of month: months_between(2014-01-xx, 2015-12-yy) == 23 regardless of
// xx/yy. Comparisons are full-date.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const Date&) const = default;

  std::string to_string() const;          // ISO-8601 YYYY-MM-DD
  static Date parse(const std::string&);  // throws Error on malformed input
  static bool try_parse(const std::string&, Date& out);

  Date plus_months(int m) const;  // day preserved, clamped to month length
};

int months_between(const Date& from, const Date& to);  // 12*dy + dm, sign-preserving

}  // namespace vcml
