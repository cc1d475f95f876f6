#include "rmab/dates.hpp"

#include <cstdio>

#include "rmab/errors.hpp"

namespace rmab {

// Howard Hinnant's public-domain civil date algorithms.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int* year, unsigned* month,
                     unsigned* day) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  *day = doy - (153 * mp + 2) / 5 + 1;
  *month = mp + (mp < 10 ? 3 : -9);
  *year = static_cast<int>(y + (*month <= 2));
}

std::int64_t parse_iso_date(const std::string& text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3 ||
      text.size() != 10 || m < 1 || m > 12 || d < 1 || d > 31) {
    throw DataError("malformed ISO-8601 date: \"" + text + "\"");
  }
  return days_from_civil(y, m, d);
}

std::string format_iso_date(std::int64_t days) {
  int y;
  unsigned m, d;
  civil_from_days(days, &y, &m, &d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
  return buf;
}

std::int64_t monday_on_or_before(std::int64_t days) {
  // 1970-01-01 was a Thursday; Monday of that week is day -3.
  std::int64_t shifted = days + 3;
  std::int64_t w = shifted % 7;
  if (w < 0) w += 7;
  return days - w;
}

}  // namespace rmab
