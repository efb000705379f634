#include "vcml/dates.hpp"

#include <cctype>
#include <cstdio>

#include "vcml/common.hpp"

namespace vcml {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return days[m - 1];
}

}  // namespace

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

bool Date::try_parse(const std::string& s, Date& out) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  const int y = std::stoi(s.substr(0, 4));
  const int m = std::stoi(s.substr(5, 2));
  const int d = std::stoi(s.substr(8, 2));
  if (m < 1 || m > 12) return false;
  if (d < 1 || d > days_in_month(y, m)) return false;
  out = Date{y, m, d};
  return true;
}

Date Date::parse(const std::string& s) {
  Date d;
  if (!try_parse(s, d)) throw Error("invalid date: '" + s + "' (expected YYYY-MM-DD)");
  return d;
}

Date Date::plus_months(int m) const {
  const int total = (year * 12 + (month - 1)) + m;
  int y = total / 12;
  int mo = total % 12;
  if (mo < 0) {
    mo += 12;
    y -= 1;
  }
  Date out{y, mo + 1, day};
  const int dim = days_in_month(out.year, out.month);
  if (out.day > dim) out.day = dim;
  return out;
}

int months_between(const Date& from, const Date& to) {
  return 12 * (to.year - from.year) + (to.month - from.month);
}

}  // namespace vcml
